"""Interaction records and the append-only dataset they accumulate into.

One record is one complete teleoperation episode: per tick the robot state,
the human's commanded action, the robot's assistive action and the arbitration
weight. Learner-facing code reads only (state, human action); robot actions
and the task label exist for evaluation and replay.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Step:
    tick: int
    state: np.ndarray
    a_h: np.ndarray
    a_r: np.ndarray
    beta: float

    @property
    def commanded(self) -> bool:
        """True when the human issued an input this tick (Idle is an exact zero)."""
        return float(np.linalg.norm(self.a_h)) > 0.0


@dataclass
class InteractionRecord:
    record_id: str
    dt: float
    steps: list = field(default_factory=list)
    label: str = ""  # evaluation-only metadata, never featurized
    seed: int = 0

    def append(self, step: Step):
        if self.steps and step.tick <= self.steps[-1].tick:
            raise ValueError("tick indices must be strictly increasing")
        self.steps.append(step)

    def __len__(self) -> int:
        return len(self.steps)

    def commanded_steps(self) -> list:
        return [s for s in self.steps if s.commanded]

    def to_dict(self) -> dict:
        return {
            "id": self.record_id,
            "dt": self.dt,
            "label": self.label,
            "seed": self.seed,
            "steps": [
                {
                    "t": s.tick,
                    "s": s.state.tolist(),
                    "a_h": s.a_h.tolist(),
                    "a_r": s.a_r.tolist(),
                    "beta": s.beta,
                }
                for s in self.steps
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InteractionRecord":
        rec = cls(record_id=d["id"], dt=d["dt"], label=d.get("label", ""), seed=d.get("seed", 0))
        for sd in d["steps"]:
            rec.append(
                Step(
                    tick=sd["t"],
                    state=np.array(sd["s"], dtype=float),
                    a_h=np.array(sd["a_h"], dtype=float),
                    a_r=np.array(sd["a_r"], dtype=float),
                    beta=float(sd["beta"]),
                )
            )
        return rec


class Dataset:
    """Append-only collection of interaction records."""

    def __init__(self, records=None):
        self.records: list = list(records) if records else []

    def append(self, record: InteractionRecord):
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def fingerprint(self) -> str:
        """Content hash over the canonical serialization; stable across round-trips."""
        blob = json.dumps([r.to_dict() for r in self.records], sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def save_jsonl(self, path):
        with open(path, "w") as f:
            for rec in self.records:
                f.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def load_jsonl(cls, path) -> "Dataset":
        ds = cls()
        with open(path) as f:
            for line in f:
                line = line.strip()
                if line:
                    ds.append(InteractionRecord.from_dict(json.loads(line)))
        return ds

    def filter_label(self, label: str) -> "Dataset":
        return Dataset([r for r in self.records if r.label == label])
