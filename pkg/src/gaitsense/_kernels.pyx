# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernel core: spline envelopes and extrema scans.

These sit inside the EMD sifting loop, which runs per channel per record
when whole datasets are preprocessed; the pure-numpy twin lives in
``_kernels_py``.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "compiled"


def natural_cubic_eval(xk, yk, int n):
    """Natural cubic spline through (xk, yk) sampled at 0..n-1."""
    cdef cnp.float64_t[::1] xv = np.ascontiguousarray(xk, dtype=np.float64)
    cdef cnp.float64_t[::1] yv = np.ascontiguousarray(yk, dtype=np.float64)
    cdef int m = xv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef cnp.float64_t[::1] M = np.zeros(m, dtype=np.float64)
    cdef cnp.float64_t[::1] h = np.empty(m - 1, dtype=np.float64)
    cdef int i, k, seg
    cdef double w, t, hs, y0, y1, m0, m1, x

    for i in range(m - 1):
        h[i] = xv[i + 1] - xv[i]

    k = m - 2
    cdef cnp.float64_t[::1] cp
    cdef cnp.float64_t[::1] dp
    if k > 0:
        cp = np.empty(k, dtype=np.float64)
        dp = np.empty(k, dtype=np.float64)
        cp[0] = h[1] / (2.0 * (h[0] + h[1]))
        dp[0] = 6.0 * ((yv[2] - yv[1]) / h[1] - (yv[1] - yv[0]) / h[0]) \
            / (2.0 * (h[0] + h[1]))
        for i in range(1, k):
            w = 2.0 * (h[i] + h[i + 1]) - h[i] * cp[i - 1]
            cp[i] = h[i + 1] / w
            dp[i] = (6.0 * ((yv[i + 2] - yv[i + 1]) / h[i + 1]
                            - (yv[i + 1] - yv[i]) / h[i])
                     - h[i] * dp[i - 1]) / w
        M[k] = dp[k - 1]
        for i in range(k - 2, -1, -1):
            M[i + 1] = dp[i] - cp[i] * M[i + 2]

    seg = 0
    for i in range(n):
        x = <double> i
        while seg < m - 2 and x >= xv[seg + 1]:
            seg += 1
        hs = h[seg]
        t = x - xv[seg]
        y0 = yv[seg]
        y1 = yv[seg + 1]
        m0 = M[seg]
        m1 = M[seg + 1]
        out[i] = (m0 * (hs - t) ** 3 / (6.0 * hs)
                  + m1 * t ** 3 / (6.0 * hs)
                  + (y0 / hs - m0 * hs / 6.0) * (hs - t)
                  + (y1 / hs - m1 * hs / 6.0) * t)
    return out


def extrema_indices(x):
    """Strict local maxima/minima indices, plateau midpoints reported once."""
    cdef cnp.float64_t[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef int n = xv.shape[0]
    cdef list maxima = []
    cdef list minima = []
    cdef int i = 0, run_end, prev_sign = 0, run_start
    cdef double d

    run_start = 0
    for i in range(n - 1):
        d = xv[i + 1] - xv[i]
        if d == 0.0:
            continue
        if d > 0:
            if prev_sign < 0:
                minima.append((run_start + 1 + i) // 2)
            prev_sign = 1
        else:
            if prev_sign > 0:
                maxima.append((run_start + 1 + i) // 2)
            prev_sign = -1
        run_start = i
    return (np.asarray(maxima, dtype=np.int64),
            np.asarray(minima, dtype=np.int64))
