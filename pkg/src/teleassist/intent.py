"""Latent task models: recognize the operator's task, replicate it, hand back control.

Three small networks share one feature space built from the operator's recent
inputs: an encoder embeds a window of (state, human action) pairs into a
Gaussian belief over a low-dimensional task code, a decoder maps (state, code)
to an assistive action, and a discriminator scores how familiar the current
behavior looks, which drives the arbitration weight.

Features are built from commanded ticks only. The operator models emit exact
zeros when deferring to the robot; those ticks carry no evidence about the
task, and folding them into windows would push deployment inputs outside the
training distribution. Robot actions are never featurized.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, replace

import numpy as np

from . import nn
from .records import Dataset, InteractionRecord, Step
from .sim import clamp_speed

log = logging.getLogger(__name__)

FEATURE_LAYOUT_VERSION = 1


@dataclass(frozen=True)
class FeatureConfig:
    """Windowed featurization: last ``window`` commanded (state, action) pairs."""

    window: int = 10
    state_dim: int = 2

    @property
    def feat_dim(self) -> int:
        # pairs flattened oldest-to-newest, left zero-padded, plus a valid-count scalar
        return self.window * 2 * self.state_dim + 1

    def fingerprint(self) -> str:
        blob = json.dumps([FEATURE_LAYOUT_VERSION, self.window, self.state_dim])
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class LatentBelief:
    mu: np.ndarray
    logvar: np.ndarray


@dataclass(frozen=True)
class ArbitrationConfig:
    kappa: float = 1.0
    beta_max: float = 0.9
    smoothing: float = 0.8  # per-tick exponential smoothing of the raw weight

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not 0.0 <= self.beta_max <= 1.0:
            raise ValueError("beta_max must lie in [0, 1]")
        if not 0.0 <= self.smoothing < 1.0:
            raise ValueError("smoothing must lie in [0, 1)")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 300
    batch_size: int = 32
    lr: float = 1e-3
    kl_weight: float = 0.01
    hidden: tuple = (64, 64)
    latent_dim: int = 2
    state_jitter: float = 0.05  # input-noise regularizer on decoder states
    decoder_dropout: float = 0.0
    disc_epochs: int = 80
    deform_alpha: float = 0.5  # deformation amplitude as a multiple of v_max
    deform_smooth: int = 5  # moving-average window over the random walk, ticks
    neg_copies: int = 2  # deformed + randomized variants per record
    pos_copies: int = 5  # noise-augmented copies of each real window
    pos_action_jitter: float = 0.12  # operator-noise blur on positive windows, x v_max


def evidence_steps(steps) -> list:
    """Commanded ticks of a (partial) interaction, in order."""
    return [s for s in steps if s.commanded]


def featurize(steps, cfg: FeatureConfig) -> np.ndarray:
    """Fixed-size window feature over the last ``cfg.window`` commanded ticks.

    Layout: [pair_oldest .. pair_newest, valid_count], each pair being
    (state, a_h) flattened; missing leading pairs are zero. Only (state, a_h)
    is read, never the robot's action.
    """
    ev = evidence_steps(steps)
    if not ev:
        raise ValueError("featurize needs at least one commanded step")
    n, H = cfg.state_dim, cfg.window
    window = ev[-H:]
    vec = np.zeros(cfg.feat_dim)
    offset = (H - len(window)) * 2 * n
    for i, s in enumerate(window):
        j = offset + i * 2 * n
        vec[j : j + n] = s.state
        vec[j + n : j + 2 * n] = s.a_h
    vec[-1] = float(len(window))
    return vec


def _pairs_from_record(rec: InteractionRecord, cfg: FeatureConfig):
    """(feature, state, action) training triples from one record's commanded ticks."""
    ev = evidence_steps(rec.steps)
    out = []
    for k in range(1, len(ev)):
        out.append((featurize(ev[:k], cfg), ev[k].state, ev[k].a_h))
    return out


def build_training_pairs(dataset: Dataset, cfg: FeatureConfig):
    """Stack prefix/target pairs across the dataset into matrices.

    Records with fewer than two commanded ticks carry no (prefix, target) pair
    and are skipped with a warning.
    """
    feats, states, actions = [], [], []
    for rec in dataset:
        triples = _pairs_from_record(rec, cfg)
        if not triples:
            log.warning("skipping degenerate record %s (<2 commanded ticks)", rec.record_id)
            continue
        for f, s, a in triples:
            feats.append(f)
            states.append(s)
            actions.append(a)
    if not feats:
        return (
            np.zeros((0, cfg.feat_dim)),
            np.zeros((0, cfg.state_dim)),
            np.zeros((0, cfg.state_dim)),
        )
    return np.array(feats), np.array(states), np.array(actions)


@dataclass(frozen=True)
class ModelBundle:
    """Immutable (encoder, decoder, discriminator) triple plus featurization."""

    encoder: nn.Network
    decoder: nn.Network
    discriminator: nn.Network
    feat: FeatureConfig
    latent_dim: int
    v_max: float
    version: int = 0
    trained_on: int = 0
    train_seed: int = 0

    def fingerprint(self) -> str:
        blob = json.dumps(
            {
                "enc": nn.net_to_dict(self.encoder),
                "dec": nn.net_to_dict(self.decoder),
                "disc": nn.net_to_dict(self.discriminator),
                "feat": [self.feat.window, self.feat.state_dim],
                "d": self.latent_dim,
                "v_max": self.v_max,
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_dict(self) -> dict:
        return {
            "format": "teleassist-bundle",
            "version": 1,
            "bundle_version": self.version,
            "trained_on": self.trained_on,
            "seed_lineage": [self.train_seed],
            "latent_dim": self.latent_dim,
            "v_max": self.v_max,
            "feature": {"window": self.feat.window, "state_dim": self.feat.state_dim},
            "encoder": nn.net_to_dict(self.encoder),
            "decoder": nn.net_to_dict(self.decoder),
            "discriminator": nn.net_to_dict(self.discriminator),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelBundle":
        if d.get("format") != "teleassist-bundle":
            raise ValueError("not a bundle checkpoint")
        feat = FeatureConfig(window=d["feature"]["window"], state_dim=d["feature"]["state_dim"])
        return cls(
            encoder=nn.net_from_dict(d["encoder"]),
            decoder=nn.net_from_dict(d["decoder"]),
            discriminator=nn.net_from_dict(d["discriminator"]),
            feat=feat,
            latent_dim=d["latent_dim"],
            v_max=d["v_max"],
            version=d.get("bundle_version", 0),
            trained_on=d.get("trained_on", 0),
            train_seed=d.get("seed_lineage", [0])[0],
        )

    def save(self, path):
        nn.save_checkpoint(path, self.to_dict())

    @classmethod
    def load(cls, path) -> "ModelBundle":
        return cls.from_dict(nn.load_checkpoint(path))


def untrained_bundle(
    feat: FeatureConfig, latent_dim: int, v_max: float, hidden=(64, 64), version: int = 0
) -> ModelBundle:
    """Bundle published before any data exists: zero assistance, zero confidence.

    Nothing has been seen, so every behavior is out-of-distribution; the
    discriminator bias is pinned low so control stays with the human.
    """
    f = feat.feat_dim
    enc = nn.zero_network([f, *hidden, 2 * latent_dim])
    dec = nn.zero_network([feat.state_dim + latent_dim, *hidden, feat.state_dim])
    disc = nn.zero_network([f, *hidden, 1])
    last = disc.layers[-1]
    pinned = nn.Layer(last.w, last.b - 8.0, last.activation, last.dropout)
    disc = nn.Network(disc.layers[:-1] + (pinned,))
    return ModelBundle(enc, dec, disc, feat, latent_dim, v_max, version=version, trained_on=0)


def encode(bundle: ModelBundle, feature: np.ndarray) -> LatentBelief:
    """Gaussian belief over the task code; deployment consumers use the mean."""
    out, _ = nn.forward(bundle.encoder, feature)
    d = bundle.latent_dim
    return LatentBelief(mu=out[..., :d], logvar=out[..., d:])


def assist_action(bundle: ModelBundle, state: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Decoder action for (state, task code), speed-capped."""
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("latent code must be finite")
    x = np.concatenate([np.asarray(state, dtype=float), z])
    out, _ = nn.forward(bundle.decoder, x)
    return clamp_speed(out, bundle.v_max)


def confidence(bundle: ModelBundle, feature: np.ndarray) -> float:
    """Familiarity score in [0, 1] (logistic output of the discriminator)."""
    logit, _ = nn.forward(bundle.discriminator, feature)
    return float(1.0 / (1.0 + np.exp(-logit[0])))


def arbitrate(
    bundle: ModelBundle, steps, arb: ArbitrationConfig, prev_beta: float | None
) -> float:
    """Smoothed arbitration weight from the discriminator's familiarity score.

    raw = min(beta_max, kappa * C(window)); returned weight is the exponential
    smoothing of raw with the previous tick's weight, so a silent discriminator
    decays control back to the human geometrically. ``prev_beta=None`` warm
    starts the filter at the first measurement.
    """
    feature = featurize(steps, bundle.feat)
    raw = min(arb.beta_max, arb.kappa * confidence(bundle, feature))
    if prev_beta is None:
        beta = raw
    else:
        beta = arb.smoothing * prev_beta + (1.0 - arb.smoothing) * raw
    return float(min(max(beta, 0.0), arb.beta_max))


# ---------------------------------------------------------------------------
# training


def _bce_with_logits(logits: np.ndarray, labels: np.ndarray, weights: np.ndarray | None = None):
    # stable binary cross entropy; returns (loss, dloss/dlogits)
    z = logits.ravel()
    y = labels.ravel()
    w = np.ones_like(z) if weights is None else weights.ravel()
    per = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    loss = float(np.sum(w * per) / z.size)
    p = 1.0 / (1.0 + np.exp(-z))
    grad = (w * (p - y) / z.size).reshape(logits.shape)
    return loss, grad


def autoencoder_loss_and_grads(
    encoder: nn.Network,
    decoder: nn.Network,
    feats: np.ndarray,
    states: np.ndarray,
    actions: np.ndarray,
    eta: np.ndarray,
    kl_weight: float,
    dropout_rng: np.random.Generator | None = None,
):
    """Reconstruction + KL loss with exact gradients through the sampled code.

    ``eta`` is the standard-normal draw of the reparameterized sample
    z = mu + sigma * eta; passing it explicitly keeps the loss differentiable
    and lets tests freeze the noise.
    """
    B = feats.shape[0]
    d = eta.shape[1]
    enc_out, enc_cache = nn.forward(encoder, feats)
    mu, logvar = enc_out[:, :d], enc_out[:, d:]
    sigma = np.exp(0.5 * logvar)
    z = mu + sigma * eta
    dec_in = np.concatenate([states, z], axis=1)
    ahat, dec_cache = nn.forward(decoder, dec_in, dropout_rng=dropout_rng)

    diff = ahat - actions
    rec = float(np.sum(diff * diff) / B)
    kl = float(kl_weight * 0.5 * np.sum(mu * mu + sigma * sigma - logvar - 1.0) / B)

    dec_grads, d_dec_in = nn.backward(decoder, dec_cache, 2.0 * diff / B)
    dz = d_dec_in[:, states.shape[1] :]
    dmu = dz + kl_weight * mu / B
    dlogvar = dz * (0.5 * sigma * eta) + kl_weight * 0.5 * (sigma * sigma - 1.0) / B
    enc_grads, _ = nn.backward(encoder, enc_cache, np.concatenate([dmu, dlogvar], axis=1))
    return rec + kl, enc_grads, dec_grads


def train_autoencoder(
    dataset: Dataset, feat: FeatureConfig, cfg: TrainConfig, seed: int
):
    """Fit encoder and decoder to predict the operator's next commanded action.

    Returns (encoder, decoder, per-epoch loss curve). Raises on an empty or
    fully degenerate dataset.
    """
    feats, states, actions = build_training_pairs(dataset, feat)
    if feats.shape[0] == 0:
        raise ValueError("cannot train on an empty dataset")
    rng = np.random.default_rng(seed)
    d = cfg.latent_dim
    encoder = nn.init_network([feat.feat_dim, *cfg.hidden, 2 * d], rng)
    # start the variance head low so the sampled code is informative from the
    # first epochs; dims that carry no signal drift back up under the KL term
    last = encoder.layers[-1]
    b = last.b.copy()
    b[d:] -= 4.0
    encoder = nn.Network(encoder.layers[:-1] + (nn.Layer(last.w, b, last.activation, last.dropout),))
    decoder = nn.init_network(
        [feat.state_dim + d, *cfg.hidden, feat.state_dim], rng, dropout=cfg.decoder_dropout
    )
    enc_opt = nn.init_optimizer(encoder, lr=cfg.lr)
    dec_opt = nn.init_optimizer(decoder, lr=cfg.lr)
    N = feats.shape[0]
    batch = min(cfg.batch_size, N)
    curve = []
    for _ in range(cfg.epochs):
        order = rng.permutation(N)
        losses = []
        for start in range(0, N, batch):
            idx = order[start : start + batch]
            eta = rng.standard_normal((idx.size, d))
            drop_rng = rng if cfg.decoder_dropout > 0 else None
            s_batch = states[idx]
            if cfg.state_jitter > 0:
                # widen each corridor's basin: the assisted robot visits states
                # slightly off the demonstrated line
                s_batch = s_batch + rng.normal(0.0, cfg.state_jitter, size=s_batch.shape)
            loss, eg, dg = autoencoder_loss_and_grads(
                encoder, decoder, feats[idx], s_batch, actions[idx],
                eta, cfg.kl_weight, dropout_rng=drop_rng,
            )
            encoder, enc_opt, ok_e = nn.adam_step(encoder, eg, enc_opt)
            decoder, dec_opt, ok_d = nn.adam_step(decoder, dg, dec_opt)
            if not (ok_e and ok_d):
                log.warning("skipped non-finite gradient batch")
            losses.append(loss)
        curve.append(float(np.mean(losses)))
    return encoder, decoder, curve


def deform_actions(
    actions: np.ndarray, rng: np.random.Generator, alpha: float, smooth: int, v_max: float
) -> np.ndarray:
    """Smoothed random-walk perturbation of a command sequence.

    The walk is moving-averaged over ``smooth`` ticks and rescaled so the RMS
    of the perturbation norms equals ``alpha * v_max``.
    """
    T, n = actions.shape
    walk = np.cumsum(rng.standard_normal((T, n)), axis=0)
    kernel = np.ones(min(smooth, T)) / min(smooth, T)
    smoothed = np.column_stack([np.convolve(walk[:, j], kernel, mode="same") for j in range(n)])
    rms = np.sqrt(np.mean(np.sum(smoothed * smoothed, axis=1)))
    if rms > 0:
        smoothed *= alpha * v_max / rms
    return actions + smoothed


def randomize_directions(
    actions: np.ndarray, rng: np.random.Generator, v_max: float
) -> np.ndarray:
    """Replace the commands with random unit directions at speed v_max.

    Half the draws use an independent direction per tick (aimless wander), half
    hold one persistent heading with small noise (purposeful motion toward a
    target nobody demonstrated); both are behaviors the dataset never showed.
    """
    T, n = actions.shape
    if rng.random() < 0.5:
        raw = rng.standard_normal((T, n))
    else:
        raw = rng.standard_normal((1, n)) + rng.normal(0.0, 0.25, size=(T, n))
    norms = np.linalg.norm(raw, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return raw / norms * v_max


def _rollout_fake(start: np.ndarray, actions: np.ndarray, dt: float, v_max: float):
    """Integrate a synthetic command sequence into a dynamically consistent
    fake interaction; fake behavior must differ from real behavior in its
    states too, not carry a genuine trajectory with scrambled actions."""
    steps = []
    s = start.copy()
    for i, a in enumerate(actions):
        steps.append(Step(tick=i, state=s.copy(), a_h=a, a_r=np.zeros_like(a), beta=0.0))
        s = s + dt * clamp_speed(a, v_max)
    return steps


def _negative_features(dataset: Dataset, feat: FeatureConfig, cfg: TrainConfig, rng, v_max):
    """Unseen-behavior features: half action-deformed, half direction-randomized.

    Deformed variants start where the real interaction started (near-distribution
    negatives); randomized variants start anywhere in an expanded box around the
    visited states, so arbitrary behavior in unvisited corners of the workspace
    is covered too (far-distribution negatives).
    """
    all_states = [s.state for rec in dataset for s in evidence_steps(rec.steps)]
    if all_states:
        lo = np.min(all_states, axis=0) - 0.5
        hi = np.max(all_states, axis=0) + 0.5
    neg = []
    for rec in dataset:
        ev = evidence_steps(rec.steps)
        if len(ev) < 2:
            continue
        start = ev[0].state
        actions = np.array([s.a_h for s in ev])
        for _ in range(cfg.neg_copies):
            deformed = deform_actions(actions, rng, cfg.deform_alpha, cfg.deform_smooth, v_max)
            randomized = randomize_directions(actions, rng, v_max)
            for fake, origin in (
                (deformed, start),
                (randomized, rng.uniform(lo, hi)),
            ):
                steps = _rollout_fake(origin, fake, rec.dt, v_max)
                for k in range(1, len(steps) + 1):
                    neg.append(featurize(steps[:k], feat))
    return np.array(neg) if neg else np.zeros((0, feat.feat_dim))


def _positive_features(dataset: Dataset, feat: FeatureConfig, cfg: TrainConfig, rng, v_max):
    """Real-behavior windows plus noise-blurred copies.

    A window of k commanded ticks carries only ~2nk informative numbers and a
    handful of exact demos would be memorized outright; blurring the copies by
    the operator-noise scale makes the classifier accept the neighborhood a
    fresh run of the same task actually lands in."""
    pos = []
    for rec in dataset:
        ev = evidence_steps(rec.steps)
        if not ev:
            continue
        for k in range(1, len(ev) + 1):
            pos.append(featurize(ev[:k], feat))
        for _ in range(cfg.pos_copies):
            jit = [
                Step(
                    tick=s.tick,
                    state=s.state + rng.normal(0.0, cfg.pos_action_jitter * v_max / 3.0, s.state.shape),
                    a_h=s.a_h + rng.normal(0.0, cfg.pos_action_jitter * v_max, s.a_h.shape),
                    a_r=s.a_r,
                    beta=s.beta,
                )
                for s in ev
            ]
            for k in range(1, len(jit) + 1):
                pos.append(featurize(jit[:k], feat))
    return np.array(pos) if pos else np.zeros((0, feat.feat_dim))


def train_discriminator(
    dataset: Dataset, feat: FeatureConfig, cfg: TrainConfig, seed: int, v_max: float
) -> nn.Network:
    """Fit the seen-vs-unseen behavior classifier (logistic output)."""
    rng = np.random.default_rng(seed)
    pos_feats = _positive_features(dataset, feat, cfg, rng, v_max)
    if pos_feats.shape[0] == 0:
        raise ValueError("cannot train discriminator on an empty dataset")
    neg_feats = _negative_features(dataset, feat, cfg, rng, v_max)
    X = np.vstack([pos_feats, neg_feats])
    y = np.concatenate([np.ones(pos_feats.shape[0]), np.zeros(neg_feats.shape[0])])
    # inverse-frequency weights: several synthetic variants per record must not
    # drown out the real snippets
    n_pos, n_neg = pos_feats.shape[0], max(neg_feats.shape[0], 1)
    w = np.where(y == 1.0, X.shape[0] / (2.0 * n_pos), X.shape[0] / (2.0 * n_neg))
    net = nn.init_network([feat.feat_dim, *cfg.hidden, 1], rng)
    opt = nn.init_optimizer(net, lr=cfg.lr)
    N = X.shape[0]
    batch = min(cfg.batch_size, N)
    for _ in range(cfg.disc_epochs):
        order = rng.permutation(N)
        for start in range(0, N, batch):
            idx = order[start : start + batch]
            logits, cache = nn.forward(net, X[idx])
            _, dlogits = _bce_with_logits(logits, y[idx], w[idx])
            grads, _ = nn.backward(net, cache, dlogits)
            net, opt, ok = nn.adam_step(net, grads, opt)
            if not ok:
                log.warning("skipped non-finite discriminator batch")
    return net


def train_bundle(
    dataset: Dataset,
    feat: FeatureConfig,
    cfg: TrainConfig,
    seed: int,
    v_max: float,
    version: int = 0,
):
    """Train all three models from scratch on the full dataset.

    Returns (bundle, autoencoder curve). An empty or degenerate dataset yields
    the untrained zero-confidence bundle.
    """
    feats, _, _ = build_training_pairs(dataset, feat)
    if feats.shape[0] == 0:
        return untrained_bundle(feat, cfg.latent_dim, v_max, cfg.hidden, version=version), []
    encoder, decoder, curve = train_autoencoder(dataset, feat, cfg, seed)
    disc = train_discriminator(dataset, feat, cfg, seed + 1, v_max)
    bundle = ModelBundle(
        encoder=encoder,
        decoder=decoder,
        discriminator=disc,
        feat=feat,
        latent_dim=cfg.latent_dim,
        v_max=v_max,
        version=version,
        trained_on=len(dataset),
        train_seed=seed,
    )
    return bundle, curve
