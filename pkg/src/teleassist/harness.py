"""Interaction loop, method runtimes, and the continual-learning experiment driver.

The same ControlLoop advances both offline experiments (driven by a scripted
operator) and live teleop sessions (driven by wire commands); one tick is
assist -> command -> blend -> integrate -> record.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import baselines, intent, nn
from .humans import EffortReport, HumanModel, score_interaction
from .records import Dataset, InteractionRecord, Step
from .scenario import Scenario, ScheduleEntry
from .sim import SimConfig, TaskSpec, blend, step, task_progress

log = logging.getLogger(__name__)


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from a path of labels; keeps every rng stream independent."""
    blob = json.dumps(parts, sort_keys=True, default=str)
    return int.from_bytes(hashlib.sha256(blob.encode()).digest()[:8], "big") >> 1


# ---------------------------------------------------------------------------
# per-interaction method runtimes


class NoAssistRuntime:
    """beta = 0, a_R = 0: the operator does everything."""

    def tick(self, state, steps):
        return np.zeros_like(state), 0.0


class OursRuntime:
    """Latent-task assistance gated by the familiarity discriminator."""

    def __init__(self, bundle: intent.ModelBundle, arb: intent.ArbitrationConfig):
        self.bundle = bundle
        self.arb = arb
        self.beta: float | None = None  # warm-started at the first evidence tick

    def tick(self, state, steps):
        ev = intent.evidence_steps(steps)
        if not ev:
            return np.zeros_like(state), self.beta or 0.0
        self.beta = intent.arbitrate(self.bundle, steps, self.arb, self.beta)
        belief = intent.encode(self.bundle, intent.featurize(steps, self.bundle.feat))
        a_r = intent.assist_action(self.bundle, state, belief.mu)
        return a_r, self.beta


class BayesRuntime:
    """Goal inference over a known set; assistance toward the MAP goal."""

    def __init__(self, goals, rationality: float, v_max: float, beta_max: float):
        self.prior = baselines.GoalPrior.uniform(goals, rationality)
        self.v_max = v_max
        self.beta_max = beta_max
        self._consumed = -1

    def tick(self, state, steps):
        if steps and steps[-1].tick > self._consumed and steps[-1].commanded:
            self.prior = baselines.bayes_update(self.prior, steps[-1].state, steps[-1].a_h)
            self._consumed = steps[-1].tick
        return baselines.bayes_assist(self.prior, state, self.v_max, self.beta_max)


class DaggerRuntime:
    """History-conditioned cloning with no gate: full assistance once evidence exists."""

    def __init__(self, policy: baselines.BcPolicy, beta_max: float):
        self.policy = policy
        self.beta_max = beta_max

    def tick(self, state, steps):
        ev = intent.evidence_steps(steps)
        if not ev:
            return np.zeros_like(state), 0.0
        feature = intent.featurize(steps, self.policy.feat)
        return baselines.bc_act(self.policy, feature, state), self.beta_max


class DropoutRuntime:
    """Self-confidence gate: spread of stochastic decoder passes sets beta."""

    def __init__(self, bundle: intent.ModelBundle, gate: baselines.DropoutGate, seed: int):
        self.bundle = bundle
        self.gate = gate
        self.seed = seed

    def tick(self, state, steps):
        ev = intent.evidence_steps(steps)
        if not ev:
            return np.zeros_like(state), 0.0
        feature = intent.featurize(steps, self.bundle.feat)
        belief = intent.encode(self.bundle, feature)
        a_r = intent.assist_action(self.bundle, state, belief.mu)
        beta = baselines.dropout_beta(
            self.bundle, self.gate, feature, state, derive_seed(self.seed, len(steps))
        )
        return a_r, beta


# ---------------------------------------------------------------------------
# control loop


class ControlLoop:
    """One interaction's tick engine; the caller supplies each tick's command.

    The finished record carries the visited states and commands plus one
    trailing observation row (final state, zero actions) so evaluators can
    check completion from the record alone.
    """

    def __init__(self, task: TaskSpec | None, runtime, cfg: SimConfig, start, record_id: str, seed: int = 0):
        self.task = task
        self.runtime = runtime
        self.cfg = cfg
        self.state = np.asarray(start, dtype=float).copy()
        self.record = InteractionRecord(
            record_id=record_id, dt=cfg.dt, label=task.label if task else "", seed=seed
        )
        self.steps: list = []
        self.tick_index = 0
        self.waypoint_index = 0
        self.last_motion: np.ndarray | None = None
        self.done = False
        self.beta = 0.0
        self.a_r = np.zeros_like(self.state)

    @property
    def finished(self) -> bool:
        return self.done or self.tick_index >= self.cfg.t_max

    def begin_tick(self):
        """Compute this tick's assistance before the command is known."""
        self.a_r, self.beta = self.runtime.tick(self.state, self.steps)
        return self.a_r, self.beta

    def apply(self, a_h: np.ndarray) -> Step:
        """Blend, integrate, record; returns the recorded step."""
        a_h = np.asarray(a_h, dtype=float)
        executed = blend(self.a_r, a_h, self.beta, self.cfg.v_max)
        recorded = Step(
            tick=self.tick_index,
            state=self.state.copy(),
            a_h=a_h.copy(),
            a_r=np.asarray(self.a_r, dtype=float).copy(),
            beta=float(self.beta),
        )
        self.record.append(recorded)
        self.steps.append(recorded)
        self.state = step(self.state, executed, self.cfg)
        self.last_motion = executed
        self.tick_index += 1
        if self.task is not None:
            prog = task_progress(self.state, self.task, self.waypoint_index)
            self.waypoint_index = prog.active_index
            self.done = prog.done
        return recorded

    def finish(self) -> InteractionRecord:
        self.record.append(
            Step(
                tick=self.tick_index,
                state=self.state.copy(),
                a_h=np.zeros_like(self.state),
                a_r=np.zeros_like(self.state),
                beta=float(self.beta),
            )
        )
        return self.record


def run_interaction(
    task: TaskSpec,
    human: HumanModel,
    runtime,
    cfg: SimConfig,
    start,
    record_id: str,
    seed: int = 0,
) -> InteractionRecord:
    """Drive one scripted interaction to completion or timeout."""
    if isinstance(runtime, (OursRuntime, DropoutRuntime)):
        if runtime.bundle.feat.state_dim != cfg.dim:
            raise ValueError("bundle featurization does not match the environment")
    loop = ControlLoop(task, runtime, cfg, start, record_id, seed=seed)
    while not loop.finished:
        _, beta = loop.begin_tick()
        cmd = human.action(loop.state, loop.last_motion, beta, loop.waypoint_index)
        loop.apply(np.zeros_like(loop.state) if cmd is None else cmd)
    return loop.finish()


def run_commands(task, runtime, cfg, start, commands, record_id="replay") -> InteractionRecord:
    """Replay a scripted command sequence through the offline loop."""
    loop = ControlLoop(task, runtime, cfg, start, record_id)
    for cmd in commands:
        if loop.finished:
            break
        loop.begin_tick()
        loop.apply(np.asarray(cmd, dtype=float))
    return loop.finish()


# ---------------------------------------------------------------------------
# artifacts and scheduling


@dataclass
class MethodArtifacts:
    """Trained models shared by every method on a given dataset snapshot."""

    bundle: intent.ModelBundle
    bc: baselines.BcPolicy | None = None
    dropout_bundle: intent.ModelBundle | None = None
    dropout_gate: baselines.DropoutGate | None = None


def train_artifacts(
    scenario: Scenario, dataset: Dataset, seed: int, version: int, methods=("ours",)
) -> MethodArtifacts:
    """Retrain-from-scratch for every method the schedule needs."""
    feat = scenario.feat
    bundle, _ = intent.train_bundle(
        dataset, feat, scenario.train, derive_seed(seed, "bundle", version), scenario.sim.v_max, version=version
    )
    art = MethodArtifacts(bundle=bundle)
    usable = intent.build_training_pairs(dataset, feat)[0].shape[0] > 0
    if "dagger" in methods and usable:
        art.bc, _ = baselines.bc_train(
            dataset, feat, scenario.train, derive_seed(seed, "bc", version), scenario.sim.v_max
        )
    if "dropout" in methods and usable:
        drop_cfg = replace(scenario.train, decoder_dropout=0.1)
        art.dropout_bundle, _ = intent.train_bundle(
            dataset, feat, drop_cfg, derive_seed(seed, "dropout", version), scenario.sim.v_max, version=version
        )
        var0 = baselines.calibrate_var0(
            art.dropout_bundle, dataset, samples=20, seed=derive_seed(seed, "var0", version)
        )
        art.dropout_gate = baselines.DropoutGate(samples=20, var0=var0, beta_max=scenario.arb.beta_max)
    return art


def make_runtime(method: str, scenario: Scenario, art: MethodArtifacts, seed: int):
    if method == "noassist":
        return NoAssistRuntime()
    if method == "ours":
        return OursRuntime(art.bundle, scenario.arb)
    if method == "bayes":
        return BayesRuntime(
            scenario.bayes_goal_points(), scenario.rationality, scenario.sim.v_max, scenario.arb.beta_max
        )
    if method == "dagger":
        if art.bc is None:
            raise ValueError("dagger runtime needs a trained cloning policy")
        return DaggerRuntime(art.bc, scenario.arb.beta_max)
    if method == "dropout":
        if art.dropout_bundle is None or art.dropout_gate is None:
            raise ValueError("dropout runtime needs a dropout-trained bundle and gate")
        return DropoutRuntime(art.dropout_bundle, art.dropout_gate, seed)
    raise ValueError(f"unknown method {method!r}")


def make_human(scenario: Scenario, task: TaskSpec, seed: int, sigma: float | None = None) -> HumanModel:
    s = scenario.human.sigma if sigma is None else sigma
    return HumanModel(
        task=task,
        v_max=scenario.sim.v_max,
        sigma=s * scenario.sim.v_max if sigma is not None else s,
        theta_trust=scenario.human.theta_trust,
        beta_idle=scenario.human.beta_idle,
        rng=np.random.default_rng(seed),
    )


def calibrate_no_assist(scenario: Scenario, runs: int = 5, sigma: float | None = None) -> dict:
    """Mean no-assist completion time per task, from dedicated seeded runs."""
    out = {}
    for name, task in scenario.tasks.items():
        times = []
        for k in range(runs):
            seed = derive_seed(scenario.seed, "calibration", name, k, sigma)
            human = make_human(scenario, task, seed, sigma=sigma)
            rec = run_interaction(
                task, human, NoAssistRuntime(), scenario.sim, scenario.start, f"calib-{name}-{k}", seed
            )
            times.append((len(rec) - 1) * rec.dt)
        out[name] = float(np.mean(times))
    return out


def generate_demos(
    scenario: Scenario, task_name: str, count: int, seed_salt="demos", sigma: float | None = None
) -> list:
    """Unassisted teleop demonstrations of one task (the training corpus)."""
    task = scenario.task_named(task_name)
    records = []
    for k in range(count):
        seed = derive_seed(scenario.seed, seed_salt, task_name, k, sigma)
        human = make_human(scenario, task, seed, sigma=sigma)
        rec = run_interaction(
            task, human, NoAssistRuntime(), scenario.sim, scenario.start, f"demo-{task_name}-{k}", seed
        )
        records.append(rec)
    return records


# ---------------------------------------------------------------------------
# continual loop


@dataclass(frozen=True)
class TrialRow:
    trial: int
    method: str
    task: str
    seed: int
    effort: float
    final_error: float
    success: bool
    mean_beta: float
    bundle_version: int
    commanded_ticks: int
    total_ticks: int
    completion_time: float


def _row(trial, entry, seed, report: EffortReport, version) -> TrialRow:
    return TrialRow(
        trial=trial,
        method=entry.method,
        task=entry.task,
        seed=seed,
        effort=report.effort,
        final_error=report.final_error,
        success=report.success,
        mean_beta=report.mean_beta,
        bundle_version=version,
        commanded_ticks=report.commanded_ticks,
        total_ticks=report.total_ticks,
        completion_time=report.completion_time,
    )


@dataclass
class LoopResult:
    rows: list
    dataset: Dataset
    artifacts: MethodArtifacts
    calibration: dict
    records: list
    retrain_count: int = 0
    bundle_versions: int = 1
    rollbacks: int = 0


def _bundle_is_finite(bundle: intent.ModelBundle) -> bool:
    for net in (bundle.encoder, bundle.decoder, bundle.discriminator):
        for layer in net.layers:
            if not (np.all(np.isfinite(layer.w)) and np.all(np.isfinite(layer.b))):
                return False
    return True


def continual_loop(
    scenario: Scenario,
    initial_dataset: Dataset | None = None,
    seed: int | None = None,
    sigma: float | None = None,
) -> LoopResult:
    """Run the scenario schedule, retraining every ``retrain_cadence`` interactions.

    Each completed interaction is appended to the dataset; retraining is
    from scratch on the full dataset and publishes a fresh bundle version. A
    retrain that produces non-finite parameters is rolled back.
    """
    if not scenario.schedule:
        raise ValueError("scenario has an empty schedule")
    seed = scenario.seed if seed is None else seed
    dataset = Dataset(list(initial_dataset) if initial_dataset else [])
    methods = {e.method for e in scenario.schedule}
    version = 0
    art = train_artifacts(scenario, dataset, seed, version, methods=methods)
    calib = calibrate_no_assist(scenario, sigma=sigma)
    result = LoopResult(rows=[], dataset=dataset, artifacts=art, calibration=calib, records=[])
    trial = 0
    for entry in scenario.schedule:
        task = scenario.task_named(entry.task)
        for _ in range(entry.repetitions):
            trial += 1
            run_seed = derive_seed(seed, "trial", trial, entry.task, entry.method, sigma)
            human = make_human(scenario, task, run_seed, sigma=sigma)
            runtime = make_runtime(entry.method, scenario, art, run_seed)
            rec = run_interaction(
                task, human, runtime, scenario.sim, scenario.start,
                f"trial-{trial:04d}-{entry.task}", run_seed,
            )
            dataset.append(rec)
            result.records.append(rec)
            report = score_interaction(rec, task, calib[entry.task])
            result.rows.append(_row(trial, entry, run_seed, report, art.bundle.version))
            if trial % scenario.retrain_cadence == 0:
                new_art = train_artifacts(scenario, dataset, seed, version + 1, methods=methods)
                result.retrain_count += 1
                if _bundle_is_finite(new_art.bundle):
                    art = new_art
                    version += 1
                    result.bundle_versions += 1
                else:
                    log.warning("retrain produced non-finite parameters; keeping version %d", version)
                    result.rollbacks += 1
    result.artifacts = art
    return result


def evaluate_schedule(
    scenario: Scenario,
    art: MethodArtifacts,
    schedule,
    calibration: dict,
    seed: int,
    sigma: float | None = None,
) -> list:
    """Score a fixed artifact set on a schedule without retraining."""
    rows = []
    trial = 0
    for entry in schedule:
        task = scenario.task_named(entry.task)
        for _ in range(entry.repetitions):
            trial += 1
            run_seed = derive_seed(seed, "eval", trial, entry.task, entry.method, sigma)
            human = make_human(scenario, task, run_seed, sigma=sigma)
            runtime = make_runtime(entry.method, scenario, art, run_seed)
            rec = run_interaction(
                task, human, runtime, scenario.sim, scenario.start,
                f"eval-{trial:04d}-{entry.task}", run_seed,
            )
            report = score_interaction(rec, task, calibration[entry.task])
            rows.append(_row(trial, entry, run_seed, report, art.bundle.version))
    return rows


# ---------------------------------------------------------------------------
# guided-prefix protocol: operator steers briefly, then the learned policy
# finishes the motion on its own


def run_prefix_handoff(
    task: TaskSpec,
    human: HumanModel,
    cfg: SimConfig,
    start,
    prefix_ticks: int,
    policy_factory,
    record_id: str = "handoff",
) -> tuple:
    """Teleop for ``prefix_ticks`` ticks, then hand off to a frozen policy.

    ``policy_factory(evidence_steps)`` receives the commanded prefix and
    returns a per-state action function; the rest of the run is autonomous.
    Returns (record, final_error).
    """
    loop = ControlLoop(task, NoAssistRuntime(), cfg, start, record_id)
    for _ in range(prefix_ticks):
        if loop.finished:
            break
        loop.begin_tick()
        cmd = human.action(loop.state, loop.last_motion, 0.0, loop.waypoint_index)
        loop.apply(np.zeros_like(loop.state) if cmd is None else cmd)
    policy = policy_factory(intent.evidence_steps(loop.steps))
    while not loop.finished:
        a_r = policy(loop.state)
        loop.a_r, loop.beta = np.asarray(a_r, dtype=float), 1.0
        loop.apply(np.zeros_like(loop.state))
    rec = loop.finish()
    error = float(np.linalg.norm(loop.state - task.terminal))
    return rec, error


def ours_handoff_policy(bundle: intent.ModelBundle):
    def factory(evidence):
        feature = intent.featurize(evidence, bundle.feat)
        z = intent.encode(bundle, feature).mu
        return lambda state: intent.assist_action(bundle, state, z)

    return factory


def bc_handoff_policy(policy: baselines.BcPolicy):
    def factory(evidence):
        feature = intent.featurize(evidence, policy.feat)
        return lambda state: baselines.bc_act(policy, feature, state)

    return factory
