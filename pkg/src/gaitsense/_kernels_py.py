"""Pure-numpy fallback for the compiled kernel core.

Same algorithms as ``_kernels.pyx``; selected by :mod:`gaitsense.backend`
when the extension is unavailable or ``GAITSENSE_PURE=1`` is set.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure"


def natural_cubic_eval(xk: np.ndarray, yk: np.ndarray, n: int) -> np.ndarray:
    """Natural cubic spline through (xk, yk) sampled at integer points 0..n-1.

    xk must be strictly increasing. Outside [xk[0], xk[-1]] the boundary
    cubic segment is extended. Two knots degenerate to a straight line.
    """
    xk = np.asarray(xk, dtype=np.float64)
    yk = np.asarray(yk, dtype=np.float64)
    m = xk.size
    h = np.diff(xk)
    # second derivatives at the knots; natural boundary: M[0] = M[-1] = 0
    M = np.zeros(m)
    if m > 2:
        # tridiagonal system for interior knots (Thomas algorithm)
        a = h[:-1]                      # sub-diagonal
        b = 2.0 * (h[:-1] + h[1:])      # diagonal
        c = h[1:]                       # super-diagonal
        d = 6.0 * ((yk[2:] - yk[1:-1]) / h[1:] - (yk[1:-1] - yk[:-2]) / h[:-1])
        k = m - 2
        cp = np.empty(k)
        dp = np.empty(k)
        cp[0] = c[0] / b[0]
        dp[0] = d[0] / b[0]
        for i in range(1, k):
            w = b[i] - a[i] * cp[i - 1]
            cp[i] = c[i] / w
            dp[i] = (d[i] - a[i] * dp[i - 1]) / w
        M[k] = dp[k - 1]
        for i in range(k - 2, -1, -1):
            M[i + 1] = dp[i] - cp[i] * M[i + 2]

    x = np.arange(n, dtype=np.float64)
    seg = np.clip(np.searchsorted(xk, x, side="right") - 1, 0, m - 2)
    x0 = xk[seg]
    hs = h[seg]
    t = x - x0
    y0 = yk[seg]
    y1 = yk[seg + 1]
    M0 = M[seg]
    M1 = M[seg + 1]
    return (
        M0 * (hs - t) ** 3 / (6.0 * hs)
        + M1 * t**3 / (6.0 * hs)
        + (y0 / hs - M0 * hs / 6.0) * (hs - t)
        + (y1 / hs - M1 * hs / 6.0) * t
    )


def extrema_indices(x: np.ndarray):
    """Indices of strict local maxima and minima, plateau midpoints once.

    Endpoints are never reported. Returns (max_idx, min_idx) int64 arrays.
    """
    x = np.asarray(x, dtype=np.float64)
    d = np.sign(np.diff(x))
    nz = np.flatnonzero(d)
    if nz.size < 2:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    signs = d[nz]
    change = np.flatnonzero(signs[:-1] != signs[1:])
    # plateau between the end of one run and the start of the next;
    # a strict peak has nz[k]+1 == nz[k+1], giving that index itself
    mids = (nz[change] + 1 + nz[change + 1]) // 2
    is_max = signs[change] > 0
    return mids[is_max].astype(np.int64), mids[~is_max].astype(np.int64)
