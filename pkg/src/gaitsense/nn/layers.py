"""Layer zoo with hand-derived gradients, all in float64.

Every layer follows the same protocol: ``forward(x, training)`` caches
what backward needs, ``backward(dout)`` fills ``self.grads`` (same keys
as ``self.params``) and returns the gradient with respect to the input.
Array layout is batch-first: [B, T, C] for sequence layers.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeError

__all__ = [
    "Conv1D",
    "BatchNorm1D",
    "MaxPool1D",
    "ReLU",
    "Dropout",
    "Dense",
    "BiLSTM",
    "AdditiveAttention",
    "softmax",
    "cross_entropy",
]


class Layer:
    """Minimal parameterized-layer protocol."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def forward(self, x, training=False):  # pragma: no cover - interface
        raise NotImplementedError

    def backward(self, dout):  # pragma: no cover - interface
        raise NotImplementedError

    def zero_grads(self):
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def param_count(self) -> int:
        return sum(v.size for v in self.params.values())


def _uniform(rng, shape, fan_in):
    limit = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Conv1D(Layer):
    """1-D cross-correlation with bias and 'same' zero padding."""

    def __init__(self, c_in, filters, kernel, rng):
        super().__init__()
        self.c_in, self.filters, self.kernel = c_in, filters, kernel
        self.params = {
            "W": _uniform(rng, (kernel, c_in, filters), kernel * c_in),
            "b": np.zeros(filters),
        }
        self.zero_grads()

    def forward(self, x, training=False):
        if x.ndim != 3 or x.shape[2] != self.c_in:
            raise ShapeError(f"expected [B, T, {self.c_in}], got {x.shape}")
        k = self.kernel
        pad_l = (k - 1) // 2
        xp = np.pad(x, ((0, 0), (pad_l, k - 1 - pad_l), (0, 0)))
        # [B, T, C, K] -> [B, T, K, C] so flattening matches W's (k, c) order
        cols = sliding_window_view(xp, k, axis=1).transpose(0, 1, 3, 2)
        b_, t_ = x.shape[0], x.shape[1]
        self._cols = cols.reshape(b_, t_, k * self.c_in)
        self._x_shape = x.shape
        flat_w = self.params["W"].reshape(k * self.c_in, self.filters)
        return self._cols @ flat_w + self.params["b"]

    def backward(self, dout):
        k, c = self.kernel, self.c_in
        b_, t_, _ = self._x_shape
        self.grads["b"] += dout.sum(axis=(0, 1))
        self.grads["W"] += np.einsum("btk,btf->kf", self._cols, dout).reshape(
            k, c, self.filters
        )
        flat_w = self.params["W"].reshape(k * c, self.filters)
        dcols = (dout @ flat_w.T).reshape(b_, t_, k, c)
        pad_l = (k - 1) // 2
        dxp = np.zeros((b_, t_ + k - 1, c))
        for j in range(k):
            dxp[:, j : j + t_, :] += dcols[:, :, j, :]
        return dxp[:, pad_l : pad_l + t_, :]


class BatchNorm1D(Layer):
    """Per-channel batch normalization over the (batch, time) axes.

    Carries gamma/beta plus running mean/var, i.e. four values per
    channel, matching how framework summaries count its parameters.
    """

    def __init__(self, channels, momentum=0.9, eps=1e-5):
        super().__init__()
        self.channels, self.momentum, self.eps = channels, momentum, eps
        self.params = {"gamma": np.ones(channels), "beta": np.zeros(channels)}
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)
        self.zero_grads()

    def param_count(self) -> int:
        return 4 * self.channels

    def forward(self, x, training=False):
        if x.shape[-1] != self.channels:
            raise ShapeError(f"expected {self.channels} channels, got {x.shape}")
        if training:
            mean = x.mean(axis=(0, 1))
            var = x.var(axis=(0, 1))
            self.running_mean = self.momentum * self.running_mean + (1 - self.momentum) * mean
            self.running_var = self.momentum * self.running_var + (1 - self.momentum) * var
        else:
            mean, var = self.running_mean, self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * inv_std
        self._cache = (xhat, inv_std, training, x.shape[0] * x.shape[1])
        return self.params["gamma"] * xhat + self.params["beta"]

    def backward(self, dout):
        xhat, inv_std, training, n = self._cache
        self.grads["gamma"] += (dout * xhat).sum(axis=(0, 1))
        self.grads["beta"] += dout.sum(axis=(0, 1))
        dxhat = dout * self.params["gamma"]
        if not training:
            return dxhat * inv_std
        return (inv_std / n) * (
            n * dxhat
            - dxhat.sum(axis=(0, 1))
            - xhat * (dxhat * xhat).sum(axis=(0, 1))
        )


class MaxPool1D(Layer):
    """Non-overlapping max pooling along time, width 2."""

    def __init__(self, width=2):
        super().__init__()
        self.width = width

    def forward(self, x, training=False):
        b_, t_, c_ = x.shape
        t2 = t_ // self.width
        xr = x[:, : t2 * self.width, :].reshape(b_, t2, self.width, c_)
        self._argmax = xr.argmax(axis=2)
        self._in_shape = x.shape
        return xr.max(axis=2)

    def backward(self, dout):
        b_, t_, c_ = self._in_shape
        t2 = dout.shape[1]
        dxr = np.zeros((b_, t2, self.width, c_))
        bi, ti, ci = np.ogrid[:b_, :t2, :c_]
        dxr[bi, ti, self._argmax, ci] = dout
        dx = np.zeros(self._in_shape)
        dx[:, : t2 * self.width, :] = dxr.reshape(b_, t2 * self.width, c_)
        return dx


class ReLU(Layer):
    def forward(self, x, training=False):
        self._mask = x > 0
        return x * self._mask

    def backward(self, dout):
        return dout * self._mask


class Dropout(Layer):
    """Inverted dropout; active only in training, identity at inference."""

    def __init__(self, rate, rng):
        super().__init__()
        self.rate = rate
        self.rng = rng
        self._mask = None

    def forward(self, x, training=False):
        if not training or self.rate == 0.0:
            self._mask = None
            return x
        self._mask = (self.rng.random(x.shape) >= self.rate) / (1.0 - self.rate)
        return x * self._mask

    def backward(self, dout):
        if self._mask is None:
            return dout
        return dout * self._mask


class Dense(Layer):
    def __init__(self, d_in, d_out, rng):
        super().__init__()
        self.d_in, self.d_out = d_in, d_out
        self.params = {"W": _uniform(rng, (d_in, d_out), d_in), "b": np.zeros(d_out)}
        self.zero_grads()

    def forward(self, x, training=False):
        if x.shape[-1] != self.d_in:
            raise ShapeError(f"expected width {self.d_in}, got {x.shape}")
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dout):
        self.grads["W"] += self._x.T @ dout
        self.grads["b"] += dout.sum(axis=0)
        return dout @ self.params["W"].T


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


class _LstmDirection:
    """One direction of an LSTM; gate order i, f, g, o."""

    def __init__(self, c_in, hidden, rng):
        self.c_in, self.h = c_in, hidden
        self.Wx = _uniform(rng, (c_in, 4 * hidden), hidden)
        self.Wh = _uniform(rng, (hidden, 4 * hidden), hidden)
        self.b = np.zeros(4 * hidden)
        self.b[hidden : 2 * hidden] = 1.0  # forget-gate bias
        self.gWx = np.zeros_like(self.Wx)
        self.gWh = np.zeros_like(self.Wh)
        self.gb = np.zeros_like(self.b)

    def forward(self, x):
        b_, t_, _ = x.shape
        h_dim = self.h
        h = np.zeros((b_, h_dim))
        c = np.zeros((b_, h_dim))
        self._cache = []
        out = np.empty((b_, t_, h_dim))
        for t in range(t_):
            z = x[:, t, :] @ self.Wx + h @ self.Wh + self.b
            i = _sigmoid(z[:, :h_dim])
            f = _sigmoid(z[:, h_dim : 2 * h_dim])
            g = np.tanh(z[:, 2 * h_dim : 3 * h_dim])
            o = _sigmoid(z[:, 3 * h_dim :])
            c_new = f * c + i * g
            tc = np.tanh(c_new)
            self._cache.append((x[:, t, :], h, c, i, f, g, o, tc))
            c = c_new
            h = o * tc
            out[:, t, :] = h
        return out

    def backward(self, dout, dx):
        b_ = dout.shape[0]
        h_dim = self.h
        dh_next = np.zeros((b_, h_dim))
        dc_next = np.zeros((b_, h_dim))
        for t in range(len(self._cache) - 1, -1, -1):
            x_t, h_prev, c_prev, i, f, g, o, tc = self._cache[t]
            dh = dout[:, t, :] + dh_next
            do = dh * tc
            dc = dc_next + dh * o * (1.0 - tc * tc)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            da = np.concatenate(
                [
                    di * i * (1 - i),
                    df * f * (1 - f),
                    dg * (1 - g * g),
                    do * o * (1 - o),
                ],
                axis=1,
            )
            self.gWx += x_t.T @ da
            self.gWh += h_prev.T @ da
            self.gb += da.sum(axis=0)
            dx[:, t, :] += da @ self.Wx.T
            dh_next = da @ self.Wh.T
            dc_next = dc * f


class BiLSTM(Layer):
    """Forward and reversed-input LSTMs with concatenated per-step outputs."""

    def __init__(self, c_in, hidden, rng):
        super().__init__()
        self.c_in, self.h = c_in, hidden
        self.fwd = _LstmDirection(c_in, hidden, rng)
        self.bwd = _LstmDirection(c_in, hidden, rng)
        self._sync_params()

    def _sync_params(self):
        self.params = {
            "fwd_Wx": self.fwd.Wx, "fwd_Wh": self.fwd.Wh, "fwd_b": self.fwd.b,
            "bwd_Wx": self.bwd.Wx, "bwd_Wh": self.bwd.Wh, "bwd_b": self.bwd.b,
        }
        self.grads = {
            "fwd_Wx": self.fwd.gWx, "fwd_Wh": self.fwd.gWh, "fwd_b": self.fwd.gb,
            "bwd_Wx": self.bwd.gWx, "bwd_Wh": self.bwd.gWh, "bwd_b": self.bwd.gb,
        }

    def zero_grads(self):
        for d in (self.fwd, self.bwd):
            d.gWx = np.zeros_like(d.Wx)
            d.gWh = np.zeros_like(d.Wh)
            d.gb = np.zeros_like(d.b)
        self._sync_params()

    def forward(self, x, training=False):
        if x.shape[-1] != self.c_in:
            raise ShapeError(f"expected {self.c_in} features, got {x.shape}")
        out_f = self.fwd.forward(x)
        out_b = self.bwd.forward(x[:, ::-1, :])[:, ::-1, :]
        return np.concatenate([out_f, out_b], axis=2)

    def backward(self, dout):
        h_dim = self.h
        dx = np.zeros((dout.shape[0], dout.shape[1], self.c_in))
        self.fwd.backward(dout[:, :, :h_dim], dx)
        dx_rev = np.zeros_like(dx)
        self.bwd.backward(dout[:, ::-1, h_dim:], dx_rev)
        dx += dx_rev[:, ::-1, :]
        self._sync_params()
        return dx


class AdditiveAttention(Layer):
    """Score-vector attention over tanh-projected states, plus boundary states.

    Scores e_t = v . tanh(W h_t + b), weights softmax over time, context
    c = sum_t alpha_t h_t. Output concatenates c with the forward
    direction's last state and the backward direction's first state,
    doubling the width (2H -> 4H, 64 -> 128 in the default model).
    """

    def __init__(self, d_in, hidden, rng):
        super().__init__()
        self.d_in, self.hidden = d_in, hidden
        self.params = {
            "W": _uniform(rng, (d_in, hidden), d_in),
            "b": np.zeros(hidden),
            "v": _uniform(rng, (hidden,), hidden),
        }
        self.zero_grads()

    @property
    def d_out(self) -> int:
        return 2 * self.d_in

    def forward(self, x, training=False):
        if x.ndim != 3 or x.shape[2] != self.d_in:
            raise ShapeError(f"expected [B, T, {self.d_in}], got {x.shape}")
        u = np.tanh(x @ self.params["W"] + self.params["b"])
        e = u @ self.params["v"]
        e = e - e.max(axis=1, keepdims=True)
        alpha = np.exp(e)
        alpha /= alpha.sum(axis=1, keepdims=True)
        context = np.einsum("bt,btd->bd", alpha, x)
        h = self.d_in // 2
        self._cache = (x, u, alpha)
        return np.concatenate([context, x[:, -1, :h], x[:, 0, h:]], axis=1)

    def backward(self, dout):
        x, u, alpha = self._cache
        d = self.d_in
        h = d // 2
        dc = dout[:, :d]
        dx = alpha[:, :, None] * dc[:, None, :]
        dx[:, -1, :h] += dout[:, d : d + h]
        dx[:, 0, h:] += dout[:, d + h :]
        dalpha = np.einsum("bd,btd->bt", dc, x)
        de = alpha * (dalpha - (alpha * dalpha).sum(axis=1, keepdims=True))
        du = de[:, :, None] * self.params["v"]
        self.grads["v"] += np.einsum("bta,bt->a", u, de)
        dpre = du * (1.0 - u * u)
        self.grads["W"] += np.einsum("btd,bta->da", x, dpre)
        self.grads["b"] += dpre.sum(axis=(0, 1))
        dx += dpre @ self.params["W"].T
        return dx


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    p = np.exp(z)
    return p / p.sum(axis=-1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean categorical cross-entropy and its gradient w.r.t. the logits."""
    b_ = logits.shape[0]
    p = softmax(logits)
    eps = 1e-300
    loss = float(-np.mean(np.log(p[np.arange(b_), labels] + eps)))
    dlogits = p.copy()
    dlogits[np.arange(b_), labels] -= 1.0
    return loss, dlogits / b_
