"""Comparison methods: history-conditioned cloning, dropout gating, Bayes assist.

The cloning baseline consumes byte-identical features to the latent-task
models (same window, same sampling of prefix/target pairs) so comparisons
isolate the latent bottleneck. The dropout gate reuses a bundle whose decoder
was trained with dropout and reads confidence off the spread of sampled
actions. The Bayes baseline assumes a known goal set and does Boltzmann
directional inference over it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from . import nn
from .intent import FeatureConfig, ModelBundle, TrainConfig, build_training_pairs, encode
from .records import Dataset
from .sim import clamp_speed

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# behavior cloning (dataset-aggregation style: retrain on everything collected)


@dataclass(frozen=True)
class BcPolicy:
    net: nn.Network
    feat: FeatureConfig
    v_max: float

    def feature_fingerprint(self) -> str:
        return self.feat.fingerprint()


def bc_train(dataset: Dataset, feat: FeatureConfig, cfg: TrainConfig, seed: int, v_max: float):
    """Squared-error cloning of (window feature + state) -> next commanded action."""
    feats, states, actions = build_training_pairs(dataset, feat)
    if feats.shape[0] == 0:
        raise ValueError("cannot train on an empty dataset")
    rng = np.random.default_rng(seed)
    net = nn.init_network([feat.feat_dim + feat.state_dim, *cfg.hidden, feat.state_dim], rng)
    opt = nn.init_optimizer(net, lr=cfg.lr)
    N = feats.shape[0]
    batch = min(cfg.batch_size, N)
    curve = []
    for _ in range(cfg.epochs):
        order = rng.permutation(N)
        losses = []
        for start in range(0, N, batch):
            idx = order[start : start + batch]
            s_batch = states[idx]
            if cfg.state_jitter > 0:
                # same input-noise regularizer as the latent-task models
                s_batch = s_batch + rng.normal(0.0, cfg.state_jitter, size=s_batch.shape)
            X = np.concatenate([feats[idx], s_batch], axis=1)
            pred, cache = nn.forward(net, X)
            diff = pred - actions[idx]
            loss = float(np.sum(diff * diff) / idx.size)
            grads, _ = nn.backward(net, cache, 2.0 * diff / idx.size)
            net, opt, ok = nn.adam_step(net, grads, opt)
            if not ok:
                log.warning("skipped non-finite cloning batch")
            losses.append(loss)
        curve.append(float(np.mean(losses)))
    return BcPolicy(net=net, feat=feat, v_max=v_max), curve


def bc_act(policy: BcPolicy, feature: np.ndarray, state: np.ndarray) -> np.ndarray:
    x = np.concatenate([feature, np.asarray(state, dtype=float)])
    out, _ = nn.forward(policy.net, x)
    return clamp_speed(out, policy.v_max)


# ---------------------------------------------------------------------------
# dropout self-confidence gate


@dataclass(frozen=True)
class DropoutGate:
    samples: int = 20
    var0: float = 1.0  # variance scale; calibrated on the training set
    beta_max: float = 0.9

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("need at least two dropout samples")
        if not self.var0 > 0:
            raise ValueError("var0 must be positive")


def _sampled_actions(bundle: ModelBundle, feature, state, seed: int, samples: int):
    mu = encode(bundle, feature).mu
    x = np.concatenate([np.asarray(state, dtype=float), mu])
    rng = np.random.default_rng(seed)
    outs = []
    for _ in range(samples):
        out, _ = nn.forward(bundle.decoder, x, dropout_rng=rng)
        outs.append(out)
    return np.array(outs)


def pairwise_variance(actions: np.ndarray) -> float:
    """Mean pairwise squared distance between sampled actions."""
    m = actions.shape[0]
    total = 0.0
    for i in range(m):
        diff = actions[i + 1 :] - actions[i]
        total += float(np.sum(diff * diff))
    return 2.0 * total / (m * (m - 1))


def dropout_beta(
    bundle: ModelBundle, gate: DropoutGate, feature: np.ndarray, state: np.ndarray, seed: int
) -> float:
    """Self-confidence weight from the spread of stochastic decoder passes."""
    acts = _sampled_actions(bundle, feature, state, seed, gate.samples)
    var = pairwise_variance(acts)
    return float(min(gate.beta_max, np.exp(-var / gate.var0)))


def calibrate_var0(bundle: ModelBundle, dataset: Dataset, samples: int, seed: int) -> float:
    """Mean sampled-action variance over the training pairs.

    With this scale the gate reaches its ceiling only for spreads well below
    the training-set average (and exactly at zero variance).
    """
    feats, states, _ = build_training_pairs(dataset, bundle.feat)
    if feats.shape[0] == 0:
        raise ValueError("cannot calibrate on an empty dataset")
    rng = np.random.default_rng(seed)
    idx = rng.permutation(feats.shape[0])[:200]
    variances = [
        pairwise_variance(_sampled_actions(bundle, feats[i], states[i], seed + 7 * i, samples))
        for i in idx
    ]
    v = float(np.mean(variances))
    return max(v, 1e-12)


# ---------------------------------------------------------------------------
# Bayesian goal inference over a known goal set


@dataclass(frozen=True)
class GoalPrior:
    goals: tuple  # known goal positions
    posterior: np.ndarray
    rationality: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "goals", tuple(np.asarray(g, dtype=float) for g in self.goals))
        p = np.asarray(self.posterior, dtype=float)
        if np.any(p < 0) or not np.isclose(p.sum(), 1.0):
            raise ValueError("posterior must be a probability vector")
        object.__setattr__(self, "posterior", p)

    @classmethod
    def uniform(cls, goals, rationality: float = 5.0) -> "GoalPrior":
        goals = tuple(goals)
        return cls(goals=goals, posterior=np.full(len(goals), 1.0 / len(goals)), rationality=rationality)


def bayes_update(prior: GoalPrior, state: np.ndarray, a_h: np.ndarray) -> GoalPrior:
    """One Boltzmann-rational update: P(g) *= exp(lambda * cos(a_h, g - s)).

    A goal the robot is already sitting on provides no directional evidence
    and gets the uniform likelihood exp(0).
    """
    state = np.asarray(state, dtype=float)
    a_h = np.asarray(a_h, dtype=float)
    an = float(np.linalg.norm(a_h))
    if an < 1e-12:
        raise ValueError("bayes_update needs a non-idle human action")
    lik = np.empty(len(prior.goals))
    for i, g in enumerate(prior.goals):
        to_goal = g - state
        gn = float(np.linalg.norm(to_goal))
        cos = 0.0 if gn < 1e-9 else float(np.dot(a_h, to_goal) / (an * gn))
        lik[i] = np.exp(prior.rationality * cos)
    post = prior.posterior * lik
    post = post / post.sum()
    return replace(prior, posterior=post)


def bayes_assist(prior: GoalPrior, state: np.ndarray, v_max: float, beta_max: float):
    """(assistive action, arbitration weight) toward the MAP goal."""
    state = np.asarray(state, dtype=float)
    i = int(np.argmax(prior.posterior))
    direction = prior.goals[i] - state
    dist = float(np.linalg.norm(direction))
    a_r = np.zeros_like(state) if dist < 1e-12 else direction / dist * v_max
    beta = float(min(prior.posterior[i], beta_max))
    return a_r, beta
