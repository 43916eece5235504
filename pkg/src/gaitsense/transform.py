"""Frequency-domain machinery: DFT/FFT, STFT spectrograms, wavelet denoising.

`dft` is the deliberately brute-force O(N^2) definition and serves as the
correctness oracle for the radix-2 `fft`, which is what `stft` uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LengthError, TooShort
from .signal import Signal

__all__ = [
    "Spectrogram",
    "WaveletConfig",
    "dft",
    "fft",
    "ifft",
    "stft",
    "dwt",
    "idwt",
    "wavelet_denoise",
    "soft_threshold",
]


def dft(x) -> np.ndarray:
    """Textbook discrete Fourier transform, X[k] = sum_n x[n] e^{-2*pi*i*k*n/N}."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


def fft(x) -> np.ndarray:
    """Iterative radix-2 Cooley-Tukey FFT; input length must be a power of two."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.size
    if n == 0 or (n & (n - 1)) != 0:
        raise LengthError(f"length {n} is not a power of two")
    levels = n.bit_length() - 1
    # bit-reversal permutation
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(levels):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    out = x[rev]
    half = 1
    while half < n:
        tw = np.exp(-1j * np.pi * np.arange(half) / half)
        out = out.reshape(-1, 2 * half)
        even = out[:, :half]
        odd = out[:, half:] * tw
        out = np.concatenate([even + odd, even - odd], axis=1)
        half *= 2
    return out.reshape(n)


def ifft(x) -> np.ndarray:
    """Inverse of :func:`fft` (conjugation trick, 1/N scaling)."""
    x = np.asarray(x, dtype=np.complex128)
    return np.conj(fft(np.conj(x))) / x.size


@dataclass(frozen=True)
class Spectrogram:
    """Frames-by-bins STFT magnitude grid with its analysis parameters."""

    magnitudes: np.ndarray  # (frames, W // 2 + 1)
    window_len: int
    hop: int
    sample_rate_hz: float
    window: str = "hann"

    @property
    def frames(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def bins(self) -> int:
        return self.magnitudes.shape[1]

    def bin_freq_hz(self, k: int) -> float:
        return k * self.sample_rate_hz / self.window_len


def _make_window(kind: str, w: int) -> np.ndarray:
    if kind == "hann":
        return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(w) / w))
    if kind == "rect":
        return np.ones(w)
    raise ValueError(f"unknown window kind {kind!r}")


def stft(s: Signal, window_len: int = 256, hop: int = 128, window: str = "hann") -> Spectrogram:
    """Windowed short-time Fourier magnitudes over bins 0..W/2.

    Frames start at 0, W must be a power of two and fit inside the signal.
    """
    n = len(s)
    w = window_len
    if n < w:
        raise TooShort(f"signal length {n} < window {w}")
    if w == 0 or (w & (w - 1)) != 0:
        raise LengthError(f"window length {w} is not a power of two")
    if hop < 1:
        raise ValueError("hop must be >= 1")
    win = _make_window(window, w)
    frames = 1 + (n - w) // hop
    mags = np.empty((frames, w // 2 + 1))
    for f in range(frames):
        spec = fft(s.samples[f * hop : f * hop + w] * win)
        mags[f] = np.abs(spec[: w // 2 + 1])
    return Spectrogram(mags, w, hop, s.sample_rate_hz, window)


# Daubechies 4-tap analysis filters (orthonormal, one vanishing moment pair)
_SQRT3 = math.sqrt(3.0)
_DB4_LO = np.array([1.0 + _SQRT3, 3.0 + _SQRT3, 3.0 - _SQRT3, 1.0 - _SQRT3]) / (
    4.0 * math.sqrt(2.0)
)
_DB4_HI = np.array([_DB4_LO[3], -_DB4_LO[2], _DB4_LO[1], -_DB4_LO[0]])


@dataclass(frozen=True)
class WaveletConfig:
    """Daubechies-4 decomposition depth and thresholding rule.

    threshold=None applies the universal rule sigma*sqrt(2 ln N) with the
    median absolute deviation estimate of sigma from the finest details;
    an explicit value (e.g. 0.0) overrides it.
    """

    levels: int = 4
    threshold: float | None = None

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be >= 1")


def _dwt_step(x: np.ndarray):
    n = x.size
    idx = (np.arange(0, n, 2)[:, None] + np.arange(4)[None, :]) % n
    win = x[idx]
    return win @ _DB4_LO, win @ _DB4_HI


def _idwt_step(approx: np.ndarray, detail: np.ndarray) -> np.ndarray:
    n = 2 * approx.size
    out = np.zeros(n)
    for k in range(4):
        pos = (np.arange(0, n, 2) + k) % n
        np.add.at(out, pos, approx * _DB4_LO[k] + detail * _DB4_HI[k])
    return out


def dwt(s: Signal, cfg: WaveletConfig = WaveletConfig()) -> list[np.ndarray]:
    """Periodic orthonormal Daubechies-4 analysis.

    Returns [approx_L, detail_L, detail_L-1, ..., detail_1]; the signal
    length must be a multiple of 2^levels.
    """
    n = len(s)
    if n % (1 << cfg.levels) != 0:
        raise LengthError(f"length {n} is not a multiple of 2^{cfg.levels}")
    approx = s.samples.copy()
    details = []
    for _ in range(cfg.levels):
        approx, det = _dwt_step(approx)
        details.append(det)
    return [approx] + details[::-1]


def idwt(pyramid: list[np.ndarray], sample_rate_hz: float) -> Signal:
    """Inverse of :func:`dwt`; exact reconstruction for untouched pyramids."""
    approx = pyramid[0]
    for det in pyramid[1:]:
        approx = _idwt_step(approx, det)
    return Signal(approx, sample_rate_hz)


def soft_threshold(x: np.ndarray, lam: float) -> np.ndarray:
    """Shrink toward zero by lam; zero inside [-lam, lam]."""
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def wavelet_denoise(s: Signal, cfg: WaveletConfig = WaveletConfig()) -> Signal:
    """Soft-threshold the detail coefficients and reconstruct.

    Universal threshold lam = sigma*sqrt(2 ln N), sigma estimated as
    median(|finest details|)/0.6745.
    """
    pyramid = dwt(s, cfg)
    if cfg.threshold is None:
        sigma = float(np.median(np.abs(pyramid[-1]))) / 0.6745
        lam = sigma * math.sqrt(2.0 * math.log(len(s)))
    else:
        lam = cfg.threshold
    out = [pyramid[0]] + [soft_threshold(det, lam) for det in pyramid[1:]]
    return idwt(out, s.sample_rate_hz)
