"""End-to-end chains: windowing, classification, heart rate, feature export.

A 4-channel record becomes one 220-value model input by per-channel
drift removal and normalization, a 500-sample analysis window, and
anti-aliased block averaging down to 55 points per channel.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .emd import SiftConfig, denoise_baseline
from .errors import NoBeats, TooShort
from .nn.model import Model
from .signal import MultiChannelRecord, Signal, normalize
from .synth import GaitClass

__all__ = [
    "WindowedSample",
    "HeartRateReading",
    "preprocess",
    "classify",
    "identify",
    "heart_rate",
    "export_features",
    "pulse_waveform",
]

WINDOW_SAMPLES = 500
POINTS_PER_CHANNEL = 55


@dataclass(frozen=True)
class WindowedSample:
    """One 220-value model input plus where it came from."""

    values: np.ndarray
    record_id: str | None = None
    label: str | None = None
    subject: int | None = None


@dataclass(frozen=True)
class HeartRateReading:
    bpm: float
    confidence: float
    window_s: float
    valid: bool = True


def _block_average(x: np.ndarray, points: int) -> np.ndarray:
    return np.array([chunk.mean() for chunk in np.array_split(x, points)])


def preprocess(record: MultiChannelRecord, denoise: bool = True,
               sift_cfg: SiftConfig = SiftConfig()) -> WindowedSample:
    """Per channel: drift removal, max-abs normalization, 500-sample window,
    block averaging to 55 points; the four channels concatenate to 220."""
    if len(record) < WINDOW_SAMPLES:
        raise TooShort(f"need >= {WINDOW_SAMPLES} samples, got {len(record)}")
    parts = []
    for ch in record.channels:
        if denoise:
            ch = denoise_baseline(ch, sift_cfg)
        ch = normalize(ch)
        window = ch.samples[:WINDOW_SAMPLES]
        parts.append(_block_average(window, POINTS_PER_CHANNEL))
    return WindowedSample(
        values=np.concatenate(parts),
        label=record.label,
        subject=record.subject,
    )


def _predict(model: Model, record: MultiChannelRecord, denoise: bool):
    sample = preprocess(record, denoise=denoise)
    x = sample.values.reshape(1, -1, 1)
    probs = model.predict_proba(x)[0]
    idx = int(np.argmax(probs))  # ties resolve to the lowest class index
    return idx, float(probs[idx]), probs


def classify(model: Model, record: MultiChannelRecord, denoise: bool = True):
    """(GaitClass, confidence, per-class probabilities) for one record."""
    idx, conf, probs = _predict(model, record, denoise)
    return GaitClass(idx), conf, probs


def identify(model: Model, record: MultiChannelRecord, denoise: bool = True):
    """(subject id, confidence) under a subject-classification model."""
    idx, conf, _ = _predict(model, record, denoise)
    return idx, conf


def heart_rate(ecg: Signal, threshold_ratio: float = 0.6,
               refractory_s: float = 0.25) -> HeartRateReading:
    """Beats per minute from adaptive-threshold peak detection.

    Detrends with a moving average, thresholds at threshold_ratio times a
    rolling maximum, enforces the refractory period, and reports
    60 / median inter-peak interval. Confidence falls with interval
    dispersion. Amplitude scaling of the input does not change the result.
    """
    fs = ecg.sample_rate_hz
    if ecg.duration_s < 5.0 or fs < 50.0:
        raise NoBeats("need at least 5 s of signal at >= 50 Hz")
    x = ecg.samples
    # detrend: subtract a 0.8 s moving average (passes 0.5-8 Hz beats)
    win = max(3, int(round(0.8 * fs)) | 1)
    kernel = np.ones(win) / win
    trend = np.convolve(np.pad(x, win // 2, mode="edge"), kernel, mode="valid")
    y = x - trend
    if not np.any(y):
        raise NoBeats("flat signal")
    # rolling maximum over ~2 s for the adaptive threshold
    rwin = max(3, int(round(2.0 * fs)) | 1)
    yp = np.pad(y, rwin // 2, mode="edge")
    rolling_max = sliding_window_view(yp, rwin).max(axis=1)
    thresh = threshold_ratio * np.maximum(rolling_max, 1e-12)

    refractory = int(round(refractory_s * fs))
    candidates = np.flatnonzero(
        (y[1:-1] > thresh[1:-1]) & (y[1:-1] >= y[:-2]) & (y[1:-1] > y[2:])
    ) + 1
    peaks = []
    for i in candidates:
        if peaks and i - peaks[-1] < refractory:
            # keep the taller of the two contenders inside the refractory span
            if y[i] > y[peaks[-1]]:
                peaks[-1] = i
            continue
        peaks.append(int(i))
    if len(peaks) < 2:
        raise NoBeats("fewer than 2 peaks detected")
    intervals = np.diff(peaks) / fs
    median_rr = float(np.median(intervals))
    bpm = 60.0 / median_rr
    dispersion = float(np.std(intervals) / np.mean(intervals))
    confidence = float(np.clip(1.0 - dispersion, 0.0, 1.0))
    valid = 20.0 <= bpm <= 250.0
    return HeartRateReading(bpm=bpm, confidence=confidence,
                            window_s=ecg.duration_s, valid=valid)


def pulse_waveform(bpm: float, duration_s: float, fs: float,
                   noise_db: float | None = None, seed: int = 0) -> Signal:
    """Synthetic heartbeat pulse train, optionally with white noise at the
    given SNR (dB). Used by tests and the simulated heart node."""
    n = int(round(duration_s * fs))
    t = np.arange(n) / fs
    period = 60.0 / bpm
    x = np.zeros(n)
    k = 0
    while k * period <= t[-1]:
        x += np.exp(-0.5 * ((t - k * period) / 0.03) ** 2)
        x -= 0.35 * np.exp(-0.5 * ((t - k * period - 0.12) / 0.05) ** 2)
        k += 1
    if noise_db is not None:
        rng = np.random.Generator(np.random.PCG64(seed))
        white = rng.standard_normal(n)
        ps, pn = np.mean(x**2), np.mean(white**2)
        x = x + white * np.sqrt(ps / (pn * 10.0 ** (noise_db / 10.0)))
    return Signal(x, fs)


def _tap_layer_name(model: Model, tap: str) -> str | None:
    if tap == "input":
        return None
    if tap == "conv":
        return f"maxpool_{len(model.config.conv_blocks) - 1}"
    if tap == "bilstm":
        return f"dropout_{model.config.lstm_layers - 1}"
    if tap == "attention":
        return "attention"
    raise ValueError(f"unknown tap {tap!r}; use input/conv/bilstm/attention")


def export_features(model: Model, samples: list[WindowedSample], tap: str,
                    path) -> int:
    """Write per-sample activations at the named tap to CSV; returns row count.

    Columns: label, subject, then the flattened feature vector.
    """
    layer_name = _tap_layer_name(model, tap)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for s in samples:
            if layer_name is None:
                feat = s.values
            else:
                out = model.forward(s.values.reshape(1, -1, 1), training=False,
                                    tap=layer_name)
                feat = out.reshape(-1)
            writer.writerow([s.label or "", "" if s.subject is None else s.subject]
                            + [f"{v:.9g}" for v in feat])
    return len(samples)
