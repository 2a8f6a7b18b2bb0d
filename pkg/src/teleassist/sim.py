"""Deterministic kinematic simulator: point-robot dynamics, control blending, tasks.

States and actions are plain float64 numpy vectors of length ``n`` (default
n=2, position control in a planar workspace; the same integrator works for
joint-space vectors up to n=7). All functions here are pure: identical inputs
give bitwise-identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GOAL = "goal"
SKILL = "skill"


@dataclass(frozen=True)
class SimConfig:
    """Integrator and workspace parameters for one environment."""

    dt: float = 0.05
    v_max: float = 1.0
    t_max: int = 400
    low: np.ndarray = field(default_factory=lambda: np.array([-1.0, -1.0]))
    high: np.ndarray = field(default_factory=lambda: np.array([1.0, 1.0]))
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "low", np.asarray(self.low, dtype=float))
        object.__setattr__(self, "high", np.asarray(self.high, dtype=float))
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_max > 0:
            raise ValueError(f"t_max must be positive, got {self.t_max}")
        if self.low.shape != self.high.shape or np.any(self.low >= self.high):
            raise ValueError("workspace bounds must satisfy low < high componentwise")

    @property
    def dim(self) -> int:
        return self.low.shape[0]


@dataclass(frozen=True)
class TaskSpec:
    """A task the simulated operator pursues: a target point or a waypoint path.

    Hidden from the learner: only the operator model and the evaluator may read
    ``goal``/``waypoints``/``label``.
    """

    kind: str
    goal: np.ndarray | None = None
    waypoints: tuple | None = None
    success_radius: float = 0.06
    label: str = ""

    def __post_init__(self):
        if self.kind not in (GOAL, SKILL):
            raise ValueError(f"unknown task kind {self.kind!r}")
        if not self.success_radius > 0:
            raise ValueError("success_radius must be positive")
        if self.kind == GOAL:
            if self.goal is None:
                raise ValueError("goal task needs a goal point")
            object.__setattr__(self, "goal", np.asarray(self.goal, dtype=float))
        else:
            if not self.waypoints:
                raise ValueError("skill task needs at least one waypoint")
            wps = tuple(np.asarray(w, dtype=float) for w in self.waypoints)
            object.__setattr__(self, "waypoints", wps)

    @property
    def targets(self) -> tuple:
        """Waypoint chain; a discrete goal is a one-waypoint chain."""
        if self.kind == GOAL:
            return (self.goal,)
        return self.waypoints

    @property
    def terminal(self) -> np.ndarray:
        return self.targets[-1]


@dataclass(frozen=True)
class TaskProgress:
    done: bool
    distance: float
    active_index: int


def _check_finite(name: str, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite values: {v}")
    return v


def clamp_speed(action: np.ndarray, v_max: float) -> np.ndarray:
    """Scale ``action`` down to Euclidean norm v_max if it exceeds the cap."""
    action = np.asarray(action, dtype=float)
    norm = float(np.linalg.norm(action))
    if norm > v_max and norm > 0.0:
        return action * (v_max / norm)
    return action


def step(state: np.ndarray, action: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """Integrate one tick: s' = s + dt*a, speed-capped and clamped to bounds."""
    state = _check_finite("state", state)
    action = _check_finite("action", action)
    action = clamp_speed(action, cfg.v_max)
    nxt = state + cfg.dt * action
    return np.clip(nxt, cfg.low, cfg.high)


def blend(a_r: np.ndarray, a_h: np.ndarray, beta: float, v_max: float) -> np.ndarray:
    """Arbitrated action beta*a_R + (1-beta)*a_H, then speed-capped.

    beta=0 is pure human control, beta=1 pure autonomy. The cap is applied
    after blending so arbitration can never exceed actuator limits.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    a_r = _check_finite("a_r", a_r)
    a_h = _check_finite("a_h", a_h)
    return clamp_speed(beta * a_r + (1.0 - beta) * a_h, v_max)


def task_progress(state: np.ndarray, task: TaskSpec, active_index: int = 0) -> TaskProgress:
    """Evaluate completion for the current tick.

    Waypoints must be visited in order; ``active_index`` is the caller's index
    from the previous tick and never decreases. Distance-to-completion is the
    distance to the active waypoint plus the remaining chain length.
    """
    state = np.asarray(state, dtype=float)
    targets = task.targets
    idx = active_index
    while idx < len(targets):
        tol = task.success_radius
        if float(np.linalg.norm(state - targets[idx])) <= tol:
            idx += 1
        else:
            break
    if idx >= len(targets):
        return TaskProgress(done=True, distance=0.0, active_index=len(targets))
    dist = float(np.linalg.norm(state - targets[idx]))
    for j in range(idx, len(targets) - 1):
        dist += float(np.linalg.norm(targets[j + 1] - targets[j]))
    return TaskProgress(done=False, distance=dist, active_index=idx)
