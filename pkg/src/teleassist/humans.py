"""Scripted teleoperators and the human-effort accounting used by every experiment.

The operator heads for the current goal or waypoint at full commanded speed
with Gaussian white noise per component. It stops commanding (Idle, an exact
zero that does not count toward effort) once the executed motion tracks its
intent closely enough AND the arbitration weight says the robot has taken
over; it resumes the moment either condition fails.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .records import InteractionRecord
from .sim import TaskSpec, task_progress


@dataclass
class HumanModel:
    task: TaskSpec
    v_max: float
    sigma: float = 0.0  # noise std per action component
    theta_trust: float = 0.35  # rad; executed motion within this of intent
    beta_idle: float = 0.4  # minimum arbitration weight before deferring
    rng: np.random.Generator = field(default_factory=np.random.default_rng)

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if not 0 < self.theta_trust < np.pi:
            raise ValueError("theta_trust must lie in (0, pi)")

    def desired(self, state: np.ndarray, waypoint_index: int) -> np.ndarray:
        targets = self.task.targets
        idx = min(waypoint_index, len(targets) - 1)
        direction = targets[idx] - state
        dist = float(np.linalg.norm(direction))
        if dist < 1e-12:
            return np.zeros_like(direction)
        return direction / dist * self.v_max

    def action(
        self,
        state: np.ndarray,
        last_motion: np.ndarray | None,
        beta: float,
        waypoint_index: int,
    ) -> np.ndarray | None:
        """Commanded action, or None when the operator defers to the robot."""
        desired = self.desired(state, waypoint_index)
        if beta >= self.beta_idle and _aligned(last_motion, desired, self.theta_trust):
            return None
        cmd = desired + self.rng.normal(0.0, self.sigma, size=desired.shape)
        return cmd


def _aligned(motion: np.ndarray | None, desired: np.ndarray, theta: float) -> bool:
    if motion is None:
        return False
    mn, dn = np.linalg.norm(motion), np.linalg.norm(desired)
    if mn < 1e-9 or dn < 1e-9:
        return False
    cos = float(np.dot(motion, desired) / (mn * dn))
    return cos >= np.cos(theta)


@dataclass(frozen=True)
class EffortReport:
    commanded_ticks: int
    total_ticks: int
    completion_time: float
    effort: float  # teleop time / scenario's mean no-assist completion time
    final_error: float
    success: bool
    beta_trace: tuple

    @property
    def mean_beta(self) -> float:
        return float(np.mean(self.beta_trace)) if self.beta_trace else 0.0


def score_interaction(
    record: InteractionRecord, task: TaskSpec, no_assist_mean_time: float
) -> EffortReport:
    """Effort and error metrics for one completed interaction.

    Effort is the commanded-tick time normalized by the scenario's mean
    no-assist completion time; idle ticks are free.
    """
    if not no_assist_mean_time > 0:
        raise ValueError("no-assist mean completion time must be positive")
    commanded = sum(1 for s in record.steps if s.commanded)
    total = len(record.steps)
    idx = 0
    done = False
    for s in record.steps:
        prog = task_progress(s.state, task, idx)
        idx = prog.active_index
        if prog.done:
            done = True
            break
    final_state = record.steps[-1].state if record.steps else np.zeros_like(task.terminal)
    return EffortReport(
        commanded_ticks=commanded,
        total_ticks=total,
        completion_time=total * record.dt,
        effort=commanded * record.dt / no_assist_mean_time,
        final_error=float(np.linalg.norm(final_state - task.terminal)),
        success=done,
        beta_trace=tuple(s.beta for s in record.steps),
    )
