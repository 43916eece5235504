"""Empirical mode decomposition: sifting, IMF extraction, drift removal.

The decomposition is exact by construction: the running residual is what
is left after subtracting each extracted IMF, so summing all components
always reproduces the input to rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import extrema_indices, natural_cubic_eval
from .errors import InsufficientKnots, NotOscillatory, TooShort
from .signal import Signal

__all__ = [
    "SiftConfig",
    "EmdDecomposition",
    "find_extrema",
    "spline_envelope",
    "sift",
    "emd",
    "reconstruct",
    "denoise_baseline",
    "dominant_frequency",
]


@dataclass(frozen=True)
class SiftConfig:
    """Stopping knobs for the sifting loop and the decomposition cascade.

    sd_threshold is the Cauchy-type ratio sum((h_prev - h)^2) / sum(h_prev^2);
    0.2 is the classic choice. drift_cutoff_hz and min_energy_frac control
    which components denoise_baseline discards.
    """

    sd_threshold: float = 0.2
    max_sift_iters: int = 50
    max_imfs: int = 10
    drift_cutoff_hz: float = 0.3
    min_energy_frac: float = 0.01

    def __post_init__(self):
        if not (0.0 < self.sd_threshold <= 1.0):
            raise ValueError("sd_threshold must be in (0, 1]")
        if self.max_sift_iters < 1 or self.max_imfs < 1:
            raise ValueError("iteration limits must be >= 1")


@dataclass(frozen=True)
class EmdDecomposition:
    """Ordered IMFs (highest frequency first) plus the monotone-ish residual."""

    imfs: tuple
    residual: Signal

    def components(self) -> list[Signal]:
        return list(self.imfs) + [self.residual]


def find_extrema(s: Signal):
    """Strict local maxima and minima indices; plateaus report their midpoint.

    Endpoints are never extrema. Raises TooShort below 3 samples.
    """
    if len(s) < 3:
        raise TooShort("need at least 3 samples")
    return extrema_indices(s.samples)


def spline_envelope(s: Signal, knots) -> Signal:
    """Natural cubic spline through (knot index, sample value), evaluated everywhere.

    With two knots this degenerates to the straight line between them.
    Outside the knot span the boundary segment is extended.
    """
    knots = np.asarray(knots, dtype=np.int64)
    if knots.size < 2:
        raise InsufficientKnots("need at least 2 knots")
    return s.with_samples(
        natural_cubic_eval(knots.astype(np.float64), s.samples[knots], len(s))
    )


def _mirrored_envelope(x: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Envelope with the two nearest extrema mirrored across each edge."""
    n = x.size
    xs = [float(i) for i in idx]
    ys = [x[i] for i in idx]
    # mirror about sample 0 and sample n-1 to pin down the boundary segments
    left_x = [-xs[1], -xs[0]] if xs[0] > 0 else [-xs[1]]
    left_y = [ys[1], ys[0]] if xs[0] > 0 else [ys[1]]
    right_x, right_y = [], []
    for k in (-1, -2):
        rx = 2.0 * (n - 1) - xs[k]
        if rx > xs[-1]:
            right_x.append(rx)
            right_y.append(ys[k])
    order = np.argsort(right_x)
    right_x = [right_x[i] for i in order]
    right_y = [right_y[i] for i in order]
    return natural_cubic_eval(
        np.array(left_x + xs + right_x), np.array(left_y + ys + right_y), n
    )


def zero_crossings(x: np.ndarray) -> int:
    """Number of sign changes, ignoring exact zeros."""
    s = np.sign(x)
    s = s[s != 0]
    if s.size < 2:
        return 0
    return int(np.count_nonzero(s[:-1] != s[1:]))


def oscillation_counts_ok(x: np.ndarray, boundary: int = 5) -> bool:
    """IMF property: extrema count and zero-crossing count differ by <= 1.

    If the full-signal counts miss, recount away from the first/last
    `boundary` samples where end swings distort both counts.
    """
    maxi, mini = extrema_indices(x)
    if abs((maxi.size + mini.size) - zero_crossings(x)) <= 1:
        return True
    if x.size <= 2 * boundary + 2:
        return False
    core = x[boundary:-boundary]
    maxi, mini = extrema_indices(core)
    return abs((maxi.size + mini.size) - zero_crossings(core)) <= 1


def _sift_array(x: np.ndarray, cfg: SiftConfig) -> np.ndarray:
    h = x.copy()
    for _ in range(cfg.max_sift_iters):
        maxi, mini = extrema_indices(h)
        if maxi.size < 2 or mini.size < 2:
            break
        upper = _mirrored_envelope(h, maxi)
        lower = _mirrored_envelope(h, mini)
        m = 0.5 * (upper + lower)
        denom = float(np.dot(h, h))
        if denom == 0.0:
            break
        sd = float(np.dot(m, m)) / denom
        h = h - m
        if sd < cfg.sd_threshold and oscillation_counts_ok(h):
            break
    return h


def sift(s: Signal, cfg: SiftConfig = SiftConfig()) -> Signal:
    """Extract one IMF candidate by iterative envelope-mean subtraction."""
    maxi, mini = extrema_indices(s.samples)
    if maxi.size < 2 or mini.size < 2:
        raise NotOscillatory("need at least 2 maxima and 2 minima")
    return s.with_samples(_sift_array(s.samples, cfg))


def emd(s: Signal, cfg: SiftConfig = SiftConfig()) -> EmdDecomposition:
    """Full decomposition into IMFs and a residual.

    Stops when the residual is monotone-ish (fewer than 2 maxima or 2
    minima) or max_imfs is reached. A monotone input yields zero IMFs.
    """
    residual = s.samples.copy()
    imfs = []
    while len(imfs) < cfg.max_imfs:
        maxi, mini = extrema_indices(residual)
        if maxi.size < 2 or mini.size < 2:
            break
        imf = _sift_array(residual, cfg)
        if not np.any(imf):
            break
        imfs.append(s.with_samples(imf))
        residual = residual - imf
    return EmdDecomposition(imfs=tuple(imfs), residual=s.with_samples(residual))


def reconstruct(d: EmdDecomposition, keep=None, keep_residual: bool = True) -> Signal:
    """Pointwise sum of the selected IMFs, optionally plus the residual.

    keep=None keeps every IMF; indices out of range raise IndexError.
    """
    n_imfs = len(d.imfs)
    if keep is None:
        keep = range(n_imfs)
    out = np.zeros(len(d.residual))
    for i in keep:
        if not (0 <= i < n_imfs):
            raise IndexError(f"IMF index {i} out of range 0..{n_imfs - 1}")
        out += d.imfs[i].samples
    if keep_residual:
        out = out + d.residual.samples
    return d.residual.with_samples(out)


def dominant_frequency(s: Signal) -> float:
    """Frequency (Hz) of the largest non-DC spectral magnitude."""
    spec = np.abs(np.fft.rfft(s.samples))
    if spec.size < 2 or not np.any(spec[1:]):
        return 0.0
    k = 1 + int(np.argmax(spec[1:]))
    return k * s.sample_rate_hz / len(s)


def denoise_baseline(s: Signal, cfg: SiftConfig = SiftConfig()) -> Signal:
    """Remove baseline drift and micro-noise via partial EMD reconstruction.

    Drops the residual, then trailing IMFs whose dominant frequency sits
    below cfg.drift_cutoff_hz, then leading IMFs carrying less than
    cfg.min_energy_frac of the total energy.
    """
    total = float(np.dot(s.samples, s.samples))
    if total == 0.0:
        return s
    d = emd(s, cfg)
    if not d.imfs:
        return s.with_samples(np.zeros(len(s)))
    lo, hi = 0, len(d.imfs)
    while hi > lo and dominant_frequency(d.imfs[hi - 1]) < cfg.drift_cutoff_hz:
        hi -= 1
    while lo < hi:
        e = float(np.dot(d.imfs[lo].samples, d.imfs[lo].samples))
        if e / total >= cfg.min_energy_frac:
            break
        lo += 1
    return reconstruct(d, keep=range(lo, hi), keep_residual=False)
