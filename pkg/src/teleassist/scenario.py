"""Scenario files: one YAML document describes an environment, its tasks,
operator parameters, training hyperparameters and a trial schedule.

Task geometry (goals, waypoints) lives here for the operator models and the
evaluator; learner-facing code never reads it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .intent import ArbitrationConfig, FeatureConfig, TrainConfig
from .sim import GOAL, SKILL, SimConfig, TaskSpec

METHODS = ("ours", "bayes", "dagger", "dropout", "noassist")


@dataclass(frozen=True)
class HumanParams:
    sigma: float = 0.1
    theta_trust: float = 0.35
    beta_idle: float = 0.4


@dataclass(frozen=True)
class ScheduleEntry:
    task: str
    method: str
    repetitions: int

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass(frozen=True)
class Scenario:
    name: str
    sim: SimConfig
    start: np.ndarray
    tasks: dict
    human: HumanParams
    train: TrainConfig
    arb: ArbitrationConfig
    schedule: tuple = ()
    retrain_cadence: int = 3
    noise_sweep: tuple = (0.0, 0.1, 0.2, 0.4)  # multiples of v_max
    bayes_goals: tuple = ()  # task names forming the known goal set
    rationality: float = 5.0
    demos_per_task: int = 5
    window: int = 10
    seed: int = 0

    @property
    def feat(self) -> FeatureConfig:
        return FeatureConfig(window=self.window, state_dim=self.sim.dim)

    def task_named(self, name: str) -> TaskSpec:
        if name not in self.tasks:
            raise KeyError(f"scenario has no task {name!r}")
        return self.tasks[name]

    def bayes_goal_points(self):
        pts = []
        for name in self.bayes_goals:
            task = self.task_named(name)
            if task.kind != GOAL:
                raise ValueError(f"bayes goal set entries must be goal tasks, got {name!r}")
            pts.append(task.goal)
        return pts


def _parse_task(name: str, d: dict) -> TaskSpec:
    kind = d.get("kind", GOAL)
    return TaskSpec(
        kind=kind,
        goal=np.array(d["goal"], dtype=float) if kind == GOAL else None,
        waypoints=tuple(np.array(w, dtype=float) for w in d["waypoints"]) if kind == SKILL else None,
        success_radius=float(d.get("success_radius", 0.06)),
        label=d.get("label", name),
    )


def scenario_from_dict(doc: dict) -> Scenario:
    simd = doc.get("sim", {})
    sim = SimConfig(
        dt=float(simd.get("dt", 0.05)),
        v_max=float(simd.get("v_max", 1.0)),
        t_max=int(simd.get("t_max", 400)),
        low=np.array(simd.get("low", [-1.0, -1.0]), dtype=float),
        high=np.array(simd.get("high", [1.0, 1.0]), dtype=float),
        seed=int(doc.get("seed", 0)),
    )
    hd = doc.get("human", {})
    td = doc.get("training", {})
    ad = doc.get("arbitration", {})
    tasks = {name: _parse_task(name, spec) for name, spec in doc.get("tasks", {}).items()}
    schedule = tuple(
        ScheduleEntry(task=e["task"], method=e.get("method", "ours"), repetitions=int(e.get("repetitions", 1)))
        for e in doc.get("schedule", [])
    )
    for entry in schedule:
        if entry.task not in tasks:
            raise ValueError(f"schedule references unknown task {entry.task!r}")
    return Scenario(
        name=doc.get("name", "scenario"),
        sim=sim,
        start=np.array(doc.get("start", [0.0, -0.8]), dtype=float),
        tasks=tasks,
        human=HumanParams(
            sigma=float(hd.get("sigma", 0.1)),
            theta_trust=float(hd.get("theta_trust", 0.35)),
            beta_idle=float(hd.get("beta_idle", 0.4)),
        ),
        train=TrainConfig(
            epochs=int(td.get("epochs", 300)),
            batch_size=int(td.get("batch_size", 32)),
            lr=float(td.get("lr", 1e-3)),
            kl_weight=float(td.get("kl_weight", 0.01)),
            hidden=tuple(td.get("hidden", [64, 64])),
            latent_dim=int(td.get("latent_dim", 2)),
            decoder_dropout=float(td.get("decoder_dropout", 0.0)),
            disc_epochs=int(td.get("disc_epochs", 80)),
            deform_alpha=float(td.get("deform_alpha", 0.5)),
            deform_smooth=int(td.get("deform_smooth", 5)),
            neg_copies=int(td.get("neg_copies", 2)),
            state_jitter=float(td.get("state_jitter", 0.05)),
            pos_copies=int(td.get("pos_copies", 5)),
            pos_action_jitter=float(td.get("pos_action_jitter", 0.12)),
        ),
        arb=ArbitrationConfig(
            kappa=float(ad.get("kappa", 1.0)),
            beta_max=float(ad.get("beta_max", 0.9)),
            smoothing=float(ad.get("smoothing", 0.8)),
        ),
        schedule=schedule,
        retrain_cadence=int(doc.get("retrain_cadence", 3)),
        noise_sweep=tuple(float(s) for s in doc.get("noise_sweep", [0.0, 0.1, 0.2, 0.4])),
        bayes_goals=tuple(doc.get("bayes_goals", [])),
        rationality=float(doc.get("rationality", 5.0)),
        demos_per_task=int(doc.get("demos_per_task", 5)),
        window=int(td.get("window", 10)),
        seed=int(doc.get("seed", 0)),
    )


def load_scenario(path) -> Scenario:
    with open(path) as f:
        doc = yaml.safe_load(f)
    if not isinstance(doc, dict):
        raise ValueError(f"scenario file {path} is not a mapping")
    return scenario_from_dict(doc)
