"""Core signal types, normalization, SNR, and correlation statistics.

Everything downstream (EMD, STFT, the classifier, the gateway) moves data
around as :class:`Signal` and :class:`MultiChannelRecord` instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput, InvalidSignal, ShapeError

__all__ = [
    "Signal",
    "MultiChannelRecord",
    "SnrReport",
    "normalize",
    "snr_db",
    "pearson",
    "correlation_matrix",
    "read_record_csv",
    "write_record_csv",
]


@dataclass(frozen=True)
class Signal:
    """A uniformly sampled voltage trace.

    Parameters
    ----------
    samples : array-like of float
        Sample values in volts (raw or normalized). Must be finite and
        non-empty.
    sample_rate_hz : float
        Sampling rate, strictly positive.
    """

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise InvalidSignal("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise InvalidSignal("samples contain NaN or Inf")
        if not (self.sample_rate_hz > 0):
            raise InvalidSignal(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def with_samples(self, samples) -> "Signal":
        """New Signal with the same sample rate."""
        return Signal(samples, self.sample_rate_hz)


@dataclass(frozen=True)
class MultiChannelRecord:
    """Exactly four synchronized channels plus optional labels.

    Channel order convention: [L-elbow, R-elbow, L-knee, R-knee].
    """

    channels: tuple
    label: str | None = None
    subject: int | None = None

    def __post_init__(self):
        channels = tuple(self.channels)
        if len(channels) != 4:
            raise ShapeError(f"record needs exactly 4 channels, got {len(channels)}")
        n = len(channels[0])
        fs = channels[0].sample_rate_hz
        for ch in channels[1:]:
            if len(ch) != n or ch.sample_rate_hz != fs:
                raise ShapeError("all channels must share length and sample rate")
        object.__setattr__(self, "channels", channels)

    def __len__(self) -> int:
        return len(self.channels[0])

    @property
    def sample_rate_hz(self) -> float:
        return self.channels[0].sample_rate_hz

    def as_array(self) -> np.ndarray:
        """Stack channels into a (4, N) array."""
        return np.stack([ch.samples for ch in self.channels])


@dataclass(frozen=True)
class SnrReport:
    """Mean signal power, mean noise power, and their ratio in dB."""

    ps: float
    pn: float
    snr_db: float


def normalize(s: Signal) -> Signal:
    """Scale a signal by its maximum absolute value into [-1, 1].

    The zero baseline is preserved (max-abs scaling, not min-max). An
    all-zero signal is returned unchanged so batch pipelines stay total.
    """
    peak = float(np.max(np.abs(s.samples)))
    if peak == 0.0:
        return s
    return s.with_samples(s.samples / peak)


def snr_db(signal: Signal, noise: Signal) -> SnrReport:
    """Signal-to-noise ratio, 10*log10(Ps/Pn), with mean-square powers.

    Raises
    ------
    ZeroDivisionError
        If the noise trace has zero power.
    """
    ps = float(np.mean(signal.samples**2))
    pn = float(np.mean(noise.samples**2))
    if pn == 0.0:
        raise ZeroDivisionError("noise has zero power")
    return SnrReport(ps=ps, pn=pn, snr_db=10.0 * math.log10(ps / pn))


def pearson(a: Signal, b: Signal) -> float:
    """Pearson product-moment correlation coefficient of two equal-length signals."""
    x, y = a.samples, b.samples
    if x.size != y.size:
        raise ShapeError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ShapeError("need at least 2 samples")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt(np.dot(xc, xc)))
    sy = float(np.sqrt(np.dot(yc, yc)))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInput("zero-variance input")
    r = float(np.dot(xc, yc) / (sx * sy))
    # clamp the inevitable rounding excursions past +/-1
    return max(-1.0, min(1.0, r))


def correlation_matrix(records: list[Signal]) -> np.ndarray:
    """Symmetric unit-diagonal matrix of pairwise Pearson coefficients."""
    n = len(records)
    if n < 2:
        raise ShapeError("need at least 2 signals")
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = pearson(records[i], records[j])
    return out


def write_record_csv(path, record: MultiChannelRecord) -> None:
    """Write a 4-channel record in the standard `t,ch1,ch2,ch3,ch4` format."""
    fs = record.sample_rate_hz
    data = record.as_array()
    with open(path, "w") as fh:
        fh.write("t,ch1,ch2,ch3,ch4\n")
        for i in range(data.shape[1]):
            row = ",".join(f"{v:.9g}" for v in data[:, i])
            fh.write(f"{i / fs:.6f},{row}\n")


def write_signal_csv(path, s: Signal) -> None:
    """Write a single-channel signal as `t,ch1` rows."""
    with open(path, "w") as fh:
        fh.write("t,ch1\n")
        for i, v in enumerate(s.samples):
            fh.write(f"{i / s.sample_rate_hz:.6f},{v:.9g}\n")


def read_record_csv(path):
    """Read a record CSV; returns MultiChannelRecord (4 channels) or Signal (1).

    The sample rate is recovered from the time column spacing.
    """
    raw = np.genfromtxt(path, delimiter=",", skip_header=1)
    raw = np.atleast_2d(raw)
    if raw.shape[0] < 2:
        raise InvalidSignal("CSV must contain at least 2 rows")
    dt = float(raw[1, 0] - raw[0, 0])
    if dt <= 0:
        raise InvalidSignal("time column must be increasing")
    fs = 1.0 / dt
    ncols = raw.shape[1] - 1
    if ncols == 1:
        return Signal(raw[:, 1], fs)
    if ncols == 4:
        return MultiChannelRecord(tuple(Signal(raw[:, 1 + c], fs) for c in range(4)))
    raise ShapeError(f"expected 1 or 4 channel columns, got {ncols}")
