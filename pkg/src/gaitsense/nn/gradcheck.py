"""Central finite-difference verification of every analytic gradient."""

from __future__ import annotations

import numpy as np

__all__ = ["check_layer_gradients"]


def _loss(layer, x, proj, training):
    return float(np.sum(layer.forward(x, training=training) * proj))


def check_layer_gradients(layer, x: np.ndarray, training: bool = False,
                          step: float = 1e-5, rng=None) -> float:
    """Max relative error between analytic and numeric gradients.

    The scalar objective is a fixed random projection of the layer output,
    which exercises every output element. Checks d(loss)/d(input) and
    every parameter. Relative error uses |a - n| / max(1e-6, |a| + |n|).
    """
    rng = rng or np.random.default_rng(0)
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = layer.forward(x, training=training)
    proj = rng.standard_normal(out.shape)
    layer.zero_grads()
    dx = layer.backward(proj)

    worst = 0.0

    def compare(analytic, numeric):
        nonlocal worst
        denom = max(1e-6, abs(analytic) + abs(numeric))
        worst = max(worst, abs(analytic - numeric) / denom)

    flat_x = x.reshape(-1)
    probe = rng.choice(flat_x.size, size=min(40, flat_x.size), replace=False)
    for i in probe:
        orig = flat_x[i]
        flat_x[i] = orig + step
        up = _loss(layer, x, proj, training)
        flat_x[i] = orig - step
        down = _loss(layer, x, proj, training)
        flat_x[i] = orig
        compare(dx.reshape(-1)[i], (up - down) / (2 * step))

    for key, param in layer.params.items():
        grad = layer.grads[key].reshape(-1)
        flat = param.reshape(-1)
        probe = rng.choice(flat.size, size=min(40, flat.size), replace=False)
        for i in probe:
            orig = flat[i]
            flat[i] = orig + step
            up = _loss(layer, x, proj, training)
            flat[i] = orig - step
            down = _loss(layer, x, proj, training)
            flat[i] = orig
            compare(grad[i], (up - down) / (2 * step))
    return worst
