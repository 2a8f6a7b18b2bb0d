"""Server-side state shared across sessions: the dataset, the live bundle, retraining.

The bundle swap is atomic (a single attribute assignment under a lock) and
sessions snapshot the bundle when an interaction starts, so no interaction
ever mixes two bundle versions.
"""

from __future__ import annotations

import itertools
import logging
import threading

from .. import harness, intent
from ..records import Dataset, InteractionRecord
from ..scenario import Scenario
from ..sim import GOAL

log = logging.getLogger(__name__)

LIVE = "live"
PAUSED = "paused"
RETRAINING = "retraining"


class TeleopEngine:
    def __init__(
        self,
        scenario: Scenario,
        dataset: Dataset | None = None,
        bundle: intent.ModelBundle | None = None,
        data_path: str | None = None,
        retrain_cadence: int | None = None,
    ):
        self.scenario = scenario
        self.dataset = dataset if dataset is not None else Dataset()
        self.data_path = data_path
        self.retrain_cadence = retrain_cadence or scenario.retrain_cadence
        self._lock = threading.Lock()
        if bundle is None:
            bundle = intent.untrained_bundle(
                scenario.feat,
                scenario.train.latent_dim,
                scenario.sim.v_max,
                scenario.train.hidden,
                version=0,
            )
        self.bundle = bundle
        self.mode = LIVE
        self.interactions_ended = 0
        self._session_ids = itertools.count(1)

    def next_session_id(self) -> int:
        return next(self._session_ids)

    # -- runtimes -----------------------------------------------------------

    def make_runtime(self, method: str, seed: int):
        art = harness.MethodArtifacts(bundle=self.bundle)
        return harness.make_runtime(method, self.scenario, art, seed)

    # -- dataset / retraining ----------------------------------------------

    def end_interaction(self, record: InteractionRecord) -> bool:
        """Store a finished interaction; True when the retrain cadence is due.

        Records without any commanded tick are discarded (nothing happened).
        """
        if not any(s.commanded for s in record.steps):
            log.info("discarding empty interaction %s", record.record_id)
            return False
        with self._lock:
            self.dataset.append(record)
            if self.data_path:
                self.dataset.save_jsonl(self.data_path)
            self.interactions_ended += 1
            due = self.interactions_ended % self.retrain_cadence == 0
        return due

    def retrain(self) -> tuple[bool, str]:
        """Retrain from scratch on the full dataset and swap the bundle atomically."""
        version = self.bundle.version + 1
        seed = harness.derive_seed(self.scenario.seed, "service-retrain", version)
        try:
            bundle, _ = intent.train_bundle(
                self.dataset, self.scenario.feat, self.scenario.train, seed,
                self.scenario.sim.v_max, version=version,
            )
        except Exception as exc:  # keep serving on a failed retrain
            log.exception("retrain failed")
            return False, f"retrain failed: {exc}"
        if not harness._bundle_is_finite(bundle):
            return False, "retrain produced non-finite parameters; kept previous bundle"
        with self._lock:
            self.bundle = bundle
        return True, f"bundle version {version}"

    # -- scene ----------------------------------------------------------------

    def scene_dict(self) -> dict:
        props = []
        for name, task in self.scenario.tasks.items():
            pts = [task.goal.tolist()] if task.kind == GOAL else [w.tolist() for w in task.waypoints]
            props.append(
                {"name": name, "kind": task.kind, "points": pts, "radius": task.success_radius}
            )
        return {
            "type": "scene",
            "workspace": {
                "low": self.scenario.sim.low.tolist(),
                "high": self.scenario.sim.high.tolist(),
            },
            "props": props,
            "start": self.scenario.start.tolist(),
            "dt": self.scenario.sim.dt,
            "beta_max": self.scenario.arb.beta_max,
        }
