"""Minimal dense-network stack with exact reverse-mode gradients.

Everything runs on float64 numpy and is deterministic given parameters, inputs
and rng seeds. Inference treats networks as immutable values; the optimizer
steps return fresh parameter sets.

Dropout follows the inverted convention: sampled passes divide surviving
activations by the keep probability, so the plain (off-mode) forward pass needs
no rescaling at deployment. Off-mode equals the expectation of sampled passes
exactly when the dropped layer feeds a linear output, and approximately through
further nonlinearities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("tanh", "relu", "identity")

CHECKPOINT_FORMAT = "teleassist-mlp"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class Layer:
    w: np.ndarray  # (out, in)
    b: np.ndarray  # (out,)
    activation: str
    dropout: float = 0.0  # rate applied to this layer's output

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.w.ndim != 2 or self.b.shape != (self.w.shape[0],):
            raise ValueError("layer shape mismatch")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")


@dataclass(frozen=True)
class Network:
    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        for prev, cur in zip(self.layers, self.layers[1:]):
            if cur.w.shape[1] != prev.w.shape[0]:
                raise ValueError("inconsistent layer chain")
        for layer in self.layers:
            if not (np.all(np.isfinite(layer.w)) and np.all(np.isfinite(layer.b))):
                raise ValueError("non-finite parameters")

    @property
    def in_dim(self) -> int:
        return self.layers[0].w.shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].w.shape[0]


def init_network(
    sizes,
    rng: np.random.Generator,
    hidden_activation: str = "tanh",
    out_activation: str = "identity",
    dropout: float = 0.0,
) -> Network:
    """Glorot-initialized MLP; ``sizes`` = [in, hidden..., out].

    ``dropout`` applies to every hidden layer's output (never the last layer).
    """
    if len(sizes) < 2:
        raise ValueError("need at least input and output sizes")
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
        last = i == len(sizes) - 2
        scale = np.sqrt(2.0 / (fan_in + fan_out))
        layers.append(
            Layer(
                w=rng.normal(0.0, scale, size=(fan_out, fan_in)),
                b=np.zeros(fan_out),
                activation=out_activation if last else hidden_activation,
                dropout=0.0 if last else dropout,
            )
        )
    return Network(tuple(layers))


def zero_network(sizes, hidden_activation="tanh", out_activation="identity") -> Network:
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
        last = i == len(sizes) - 2
        layers.append(
            Layer(
                w=np.zeros((fan_out, fan_in)),
                b=np.zeros(fan_out),
                activation=out_activation if last else hidden_activation,
            )
        )
    return Network(tuple(layers))


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return np.tanh(z)
    if kind == "relu":
        return np.maximum(0.0, z)
    return z


def _activate_grad(z: np.ndarray, h: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return 1.0 - h * h
    if kind == "relu":
        return (z > 0.0).astype(z.dtype)
    return np.ones_like(z)


def forward(net: Network, x: np.ndarray, dropout_rng: np.random.Generator | None = None):
    """Run the network; returns (output, cache) with cache feeding backward().

    ``x`` is (in_dim,) or (batch, in_dim). Dropout masks are sampled only when
    ``dropout_rng`` is given (training); otherwise the pass is the off-mode
    deterministic network.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    h = x.reshape(1, -1) if single else x
    if h.shape[1] != net.in_dim:
        raise ValueError(f"input dim {h.shape[1]} != network input {net.in_dim}")
    cache = []
    for layer in net.layers:
        x_in = h
        z = x_in @ layer.w.T + layer.b
        h = _activate(z, layer.activation)
        mask = None
        if layer.dropout > 0.0 and dropout_rng is not None:
            keep = 1.0 - layer.dropout
            mask = (dropout_rng.random(h.shape) < keep) / keep
            h = h * mask
        cache.append({"x": x_in, "z": z, "h": h, "mask": mask})
    out = h[0] if single else h
    return out, cache


def backward(net: Network, cache, dy: np.ndarray):
    """Exact reverse-mode gradients for a cached forward pass.

    Returns (grads, dx): one (dW, db) pair per layer and the gradient w.r.t.
    the network input (needed to chain networks).
    """
    dy = np.asarray(dy, dtype=float)
    single = dy.ndim == 1
    dh = dy.reshape(1, -1) if single else dy
    grads = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        layer, c = net.layers[i], cache[i]
        if c["mask"] is not None:
            dh = dh * c["mask"]
        dz = dh * _activate_grad(c["z"], c["h"], layer.activation)
        grads[i] = (dz.T @ c["x"], dz.sum(axis=0))
        dh = dz @ layer.w
    dx = dh[0] if single else dh
    return grads, dx


def zero_grads(net: Network):
    return [(np.zeros_like(l.w), np.zeros_like(l.b)) for l in net.layers]


def add_grads(acc, grads, scale=1.0):
    return [(aw + scale * gw, ab + scale * gb) for (aw, ab), (gw, gb) in zip(acc, grads)]


@dataclass(frozen=True)
class OptimizerState:
    """Adaptive-moment state; accumulators mirror the parameter shapes."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: tuple = ()
    v: tuple = ()


def init_optimizer(net: Network, lr: float = 1e-3) -> OptimizerState:
    zeros = tuple((np.zeros_like(l.w), np.zeros_like(l.b)) for l in net.layers)
    return OptimizerState(lr=lr, m=zeros, v=zeros)


def adam_step(net: Network, grads, opt: OptimizerState):
    """One adaptive-moment update; returns (net', opt', applied).

    Non-finite gradients skip the step and return applied=False so the caller
    can flag the batch.
    """
    for gw, gb in grads:
        if not (np.all(np.isfinite(gw)) and np.all(np.isfinite(gb))):
            return net, opt, False
    t = opt.t + 1
    corr1 = 1.0 - opt.beta1**t
    corr2 = 1.0 - opt.beta2**t
    new_layers, new_m, new_v = [], [], []
    for layer, (gw, gb), (mw, mb), (vw, vb) in zip(net.layers, grads, opt.m, opt.v):
        mw = opt.beta1 * mw + (1 - opt.beta1) * gw
        mb = opt.beta1 * mb + (1 - opt.beta1) * gb
        vw = opt.beta2 * vw + (1 - opt.beta2) * gw * gw
        vb = opt.beta2 * vb + (1 - opt.beta2) * gb * gb
        w = layer.w - opt.lr * (mw / corr1) / (np.sqrt(vw / corr2) + opt.eps)
        b = layer.b - opt.lr * (mb / corr1) / (np.sqrt(vb / corr2) + opt.eps)
        new_layers.append(Layer(w, b, layer.activation, layer.dropout))
        new_m.append((mw, mb))
        new_v.append((vw, vb))
    new_opt = OptimizerState(
        lr=opt.lr, beta1=opt.beta1, beta2=opt.beta2, eps=opt.eps,
        t=t, m=tuple(new_m), v=tuple(new_v),
    )
    return Network(tuple(new_layers)), new_opt, True


def sgd_step(net: Network, grads, lr: float):
    """Plain gradient descent; returns (net', applied)."""
    for gw, gb in grads:
        if not (np.all(np.isfinite(gw)) and np.all(np.isfinite(gb))):
            return net, False
    new_layers = [
        Layer(l.w - lr * gw, l.b - lr * gb, l.activation, l.dropout)
        for l, (gw, gb) in zip(net.layers, grads)
    ]
    return Network(tuple(new_layers)), True


def net_to_dict(net: Network) -> dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "layers": [
            {
                "shape": list(l.w.shape),
                "activation": l.activation,
                "dropout": l.dropout,
                "w": l.w.ravel().tolist(),
                "b": l.b.tolist(),
            }
            for l in net.layers
        ],
    }


def net_from_dict(d: dict) -> Network:
    if d.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a {CHECKPOINT_FORMAT} checkpoint")
    if d.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {d.get('version')}")
    layers = []
    for ld in d["layers"]:
        out_d, in_d = ld["shape"]
        layers.append(
            Layer(
                w=np.array(ld["w"], dtype=float).reshape(out_d, in_d),
                b=np.array(ld["b"], dtype=float),
                activation=ld["activation"],
                dropout=float(ld.get("dropout", 0.0)),
            )
        )
    return Network(tuple(layers))


def opt_to_dict(opt: OptimizerState) -> dict:
    return {
        "lr": opt.lr,
        "beta1": opt.beta1,
        "beta2": opt.beta2,
        "eps": opt.eps,
        "t": opt.t,
        "m": [[mw.ravel().tolist(), mb.tolist()] for mw, mb in opt.m],
        "v": [[vw.ravel().tolist(), vb.tolist()] for vw, vb in opt.v],
    }


def opt_from_dict(d: dict, net: Network) -> OptimizerState:
    def shaped(pairs):
        return tuple(
            (np.array(w, dtype=float).reshape(l.w.shape), np.array(b, dtype=float))
            for (w, b), l in zip(pairs, net.layers)
        )

    return OptimizerState(
        lr=d["lr"], beta1=d["beta1"], beta2=d["beta2"], eps=d["eps"],
        t=d["t"], m=shaped(d["m"]), v=shaped(d["v"]),
    )


def save_checkpoint(path, payload: dict):
    """Write a JSON checkpoint; ``payload`` holds nets plus run metadata."""
    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True)


def load_checkpoint(path) -> dict:
    with open(path) as f:
        return json.load(f)
