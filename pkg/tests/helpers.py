"""Independent oracles used by the tests; none of these call the code under test's
gradient, distance, or aggregation paths."""

import numpy as np


def flatten_params(net):
    return np.concatenate([np.concatenate([l.w.ravel(), l.b]) for l in net.layers])


def with_params(net, vec):
    from teleassist import nn

    layers = []
    i = 0
    for l in net.layers:
        nw = l.w.size
        w = vec[i : i + nw].reshape(l.w.shape)
        i += nw
        b = vec[i : i + l.b.size]
        i += l.b.size
        layers.append(nn.Layer(w.copy(), b.copy(), l.activation, l.dropout))
    return nn.Network(tuple(layers))


def finite_difference(loss_of_vec, vec, h=1e-5):
    """Central differences of a scalar loss over a flat parameter vector."""
    g = np.zeros_like(vec)
    for i in range(vec.size):
        up = vec.copy()
        up[i] += h
        dn = vec.copy()
        dn[i] -= h
        g[i] = (loss_of_vec(up) - loss_of_vec(dn)) / (2.0 * h)
    return g


def max_rel_err(a, b):
    """Elementwise relative error with an absolute floor for near-zero pairs."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    out = 0.0
    for x, y in zip(a, b):
        scale = max(abs(x), abs(y))
        if scale < 1e-6:
            if abs(x - y) > 1e-10:
                out = max(out, 1.0)
            continue
        out = max(out, abs(x - y) / scale)
    return out


def reference_mlp(layers, x):
    """Plain-loop forward pass: an MLP evaluated without any shared code."""
    h = list(map(float, x))
    for w, b, act in layers:
        nxt = []
        for row, bias in zip(w, b):
            z = float(bias)
            for wij, hj in zip(row, h):
                z += float(wij) * hj
            if act == "tanh":
                nxt.append(float(np.tanh(z)))
            elif act == "relu":
                nxt.append(max(0.0, z))
            else:
                nxt.append(z)
        h = nxt
    return np.array(h)


def remaining_path_length(state, targets, active_index):
    """Brute-force distance to completion along the waypoint chain."""
    total = float(np.linalg.norm(np.asarray(targets[active_index]) - np.asarray(state)))
    for j in range(active_index, len(targets) - 1):
        total += float(np.linalg.norm(np.asarray(targets[j + 1]) - np.asarray(targets[j])))
    return total


def bayes_single_update(posterior, goals, state, a_h, rationality):
    """Hand-enumerated Boltzmann update."""
    state = np.asarray(state, dtype=float)
    a_h = np.asarray(a_h, dtype=float)
    post = []
    for p, g in zip(posterior, goals):
        to_goal = np.asarray(g, dtype=float) - state
        gn = np.linalg.norm(to_goal)
        an = np.linalg.norm(a_h)
        cos = 0.0 if gn < 1e-9 else float(a_h @ to_goal / (an * gn))
        post.append(p * float(np.exp(rationality * cos)))
    s = sum(post)
    return [p / s for p in post]


def ema_square_wave_levels(beta_max, smoothing):
    """Closed-form steady-state of the smoother under C alternating {0, 1}."""
    hi = (1.0 - smoothing) * beta_max / (1.0 - smoothing**2)
    lo = smoothing * hi
    return hi, lo
