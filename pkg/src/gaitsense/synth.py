"""Parametric generator of labeled 4-channel triboelectric records.

Stands in for the fabricated sensors: per-class pulse-train templates
(phenomenological, not physical) scaled by the measured electrical
characteristics, modulated per subject, with a calibrated noise floor.

Channel order: [L-elbow, R-elbow, L-knee, R-knee]. All randomness flows
through numpy's PCG64 generator seeded from explicit integers, so every
record is a pure function of (spec, seed).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, InvalidSpec, TooFew
from .signal import MultiChannelRecord, Signal

__all__ = [
    "GaitClass",
    "SensorModel",
    "SubjectProfile",
    "DatasetSpec",
    "sensor_response",
    "synth_record",
    "synth_record_parts",
    "synth_dataset",
    "synth_identity_set",
    "default_subjects",
    "subject_template",
]


class GaitClass(enum.Enum):
    """The eight recognized postures."""

    NORMAL_WALKING = 0
    JUMPING = 1
    FALLING_DOWN = 2
    HEMIPLEGIC_GAIT = 3
    DIPLEGIC_GAIT = 4
    RUNNING = 5
    FAST_WALKING = 6
    TAI_CHI = 7


def _pwl(x: float, xs, ys) -> float:
    """Piecewise-linear map with end-slope extrapolation, clamped at 0."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if x <= xs[0]:
        y = ys[0] + (ys[1] - ys[0]) / (xs[1] - xs[0]) * (x - xs[0])
    elif x >= xs[-1]:
        y = ys[-1] + (ys[-1] - ys[-2]) / (xs[-1] - xs[-2]) * (x - xs[-1])
    else:
        y = float(np.interp(x, xs, ys))
    return max(0.0, y)


@dataclass(frozen=True)
class SensorModel:
    """Measured electrical characteristics of one sensor.

    Open-circuit voltage follows force (frequency-independent); the
    short-circuit current follows frequency, scaled by a force factor
    anchored so 1 N at 1 Hz yields 0.15 uA.
    """

    voc_vs_force: tuple = ((1.0, 0.9), (4.0, 3.5))
    isc_vs_freq: tuple = ((1.0, 0.3), (4.0, 0.8))
    force_factor: tuple = ((1.0, 0.5), (4.0, 1.0))
    sensitivity_v_per_kpa: float = 0.1428
    response_time_s: float = 0.026
    target_snr_db: float = 31.2


DEFAULT_SENSOR = SensorModel()


def sensor_response(force_n: float, freq_hz: float, m: SensorModel = DEFAULT_SENSOR):
    """Peak open-circuit voltage (V) and short-circuit current (uA).

    Edges extrapolate linearly and clamp at zero; negative inputs raise.
    """
    if force_n < 0 or freq_hz < 0:
        raise InvalidInput("force and frequency must be non-negative")
    volts = _pwl(force_n, *zip(*m.voc_vs_force))
    amps = _pwl(freq_hz, *zip(*m.isc_vs_freq)) * _pwl(force_n, *zip(*m.force_factor))
    return volts, amps


@dataclass(frozen=True)
class SubjectProfile:
    """Per-subject fine structure laid over the shared class templates.

    Subjects share stride timing closely (their raw traces stay highly
    correlated) and differ in sub-pulse accents, pulse width, small
    per-channel lags, and tremor signature.
    """

    subject_id: int
    period_scale: float = 1.0
    amp_scale: tuple = (1.0, 1.0, 1.0, 1.0)
    phase_offset_s: tuple = (0.0, 0.0, 0.0, 0.0)
    tremor_freq_hz: float = 5.0
    tremor_depth: float = 0.0
    accent: tuple = (1.0, 1.0, 1.0, 1.0, 1.0)
    width_scale: float = 1.0

    def __post_init__(self):
        if self.period_scale <= 0 or any(a <= 0 for a in self.amp_scale):
            raise InvalidSpec("scales must be positive")
        if self.tremor_depth > 0 and not (3.0 <= self.tremor_freq_hz <= 7.0):
            raise InvalidSpec("tremor frequency must lie in [3, 7] Hz when enabled")


def default_subjects(n: int = 5) -> list[SubjectProfile]:
    """Five canonical subject profiles used by the identity experiments."""
    # accents and widths stay close to 1 so raw traces of different
    # subjects remain strongly correlated; identity lives in the fine
    # structure (sub-pulse emphasis, pulse width, small lags, tremor)
    accents = [
        (1.000, 1.000, 1.000, 1.000, 1.000),
        (1.210, 0.748, 1.084, 0.832, 1.126),
        (0.790, 1.252, 0.874, 1.168, 0.916),
        (1.126, 1.126, 0.748, 1.210, 0.790),
        (0.874, 0.832, 1.252, 0.748, 1.210),
    ]
    subjects = [
        SubjectProfile(
            subject_id=i,
            period_scale=1.0,
            amp_scale=tuple(1.0 + 0.08 * ((i + c) % 4) for c in range(4)),
            phase_offset_s=tuple(
                0.0045 * (((i * 7 + c * 3) % 5) - 2) for c in range(4)
            ),
            tremor_freq_hz=3.0 + i,
            tremor_depth=0.08 + 0.05 * i,
            accent=accents[i],
            width_scale=(0.88, 0.94, 1.00, 1.06, 1.12)[i],
        )
        for i in range(5)
    ]
    return subjects[:n]


NEUTRAL_SUBJECT = SubjectProfile(subject_id=-1)


def _pulse(t: np.ndarray, t0: float, width: float, amp: float) -> np.ndarray:
    """Contact-separation pulse pair: positive peak, then negative recovery."""
    main = np.exp(-0.5 * ((t - t0) / width) ** 2)
    recovery = 0.6 * np.exp(-0.5 * ((t - t0 - 2.2 * width) / (1.6 * width)) ** 2)
    return amp * (main - recovery)


# per-class timing: (period_s, force_n, sub-pulse offsets as fractions of the
# period, sub-pulse relative amplitudes, sub-pulse widths in seconds)
_FIVE_PHASE = ((0.00, 0.08, 0.18, 0.30, 0.42), (1.00, 0.55, 0.75, 0.50, 0.85))


def _cluster(t, period, phase, offsets, amps, widths, amp_scale):
    out = np.zeros_like(t)
    t_end = t[-1]
    k = -2
    while True:
        base = k * period + phase
        if base > t_end + period:
            break
        for off, a, w in zip(offsets, amps, widths):
            out += _pulse(t, base + off * period, w, a * amp_scale)
        k += 1
    return out


def _gait_channels(t, period, force, subj, knee_amp=1.0, elbow_amp=0.5,
                   knee_scale=(1.0, 1.0), width_mult=1.0, phase=0.0,
                   model=DEFAULT_SENSOR):
    """Shared walking-family template: alternating knees, counter-swing elbows."""
    volts, _ = sensor_response(force, 1.0 / period, model)
    offsets, amps = _FIVE_PHASE
    amps = tuple(a * s for a, s in zip(amps, subj.accent))
    widths = tuple(
        w * subj.width_scale * width_mult
        for w in (0.026, 0.030, 0.034, 0.030, 0.028)
    )
    chans = []
    for c, (kind, lag) in enumerate(
        [("elbow", 0.5), ("elbow", 0.0), ("knee", 0.0), ("knee", 0.5)]
    ):
        ph = phase + lag * period + subj.phase_offset_s[c]
        if kind == "knee":
            scale = knee_amp * knee_scale[0 if c == 2 else 1]
            x = _cluster(t, period, ph, offsets, amps, widths, scale)
        else:
            x = _pulse_train_single(t, period, ph, 0.06 * subj.width_scale, elbow_amp)
        chans.append(volts * subj.amp_scale[c] * x)
    return np.stack(chans)


def _pulse_train_single(t, period, phase, width, amp):
    out = np.zeros_like(t)
    k = -2
    while k * period + phase <= t[-1] + period:
        out += _pulse(t, k * period + phase, width, amp)
        k += 1
    return out


def _template(cls: GaitClass, subj: SubjectProfile, t: np.ndarray,
              phase: float, model: SensorModel) -> np.ndarray:
    period_base = {
        GaitClass.NORMAL_WALKING: 1.0,
        GaitClass.RUNNING: 0.4,
        GaitClass.FAST_WALKING: 0.7,
        GaitClass.HEMIPLEGIC_GAIT: 1.15,
        GaitClass.DIPLEGIC_GAIT: 2.0,
        GaitClass.JUMPING: 1.2,
    }
    if cls in (GaitClass.NORMAL_WALKING, GaitClass.RUNNING, GaitClass.FAST_WALKING):
        force = {GaitClass.NORMAL_WALKING: 2.0, GaitClass.RUNNING: 4.0,
                 GaitClass.FAST_WALKING: 3.0}[cls]
        period = period_base[cls] * subj.period_scale
        return _gait_channels(t, period, force, subj, phase=phase, model=model)
    if cls is GaitClass.HEMIPLEGIC_GAIT:
        period = period_base[cls] * subj.period_scale
        ch = _gait_channels(t, period, 1.8, subj, knee_scale=(0.3, 1.0),
                            phase=phase, model=model)
        # dragging half-pulse on the affected leg
        volts, _ = sensor_response(1.8, 1.0 / period, model)
        drag = _pulse_train_single(
            t, period, phase + 0.55 * period, 0.12 * subj.width_scale, 0.35
        )
        ch[2] += volts * subj.amp_scale[2] * drag
        return ch
    if cls is GaitClass.DIPLEGIC_GAIT:
        period = period_base[cls] * subj.period_scale
        return _gait_channels(t, period, 1.5, subj, knee_scale=(0.45, 0.45),
                              elbow_amp=0.7, width_mult=2.2, phase=phase,
                              model=model)
    if cls is GaitClass.JUMPING:
        period = period_base[cls] * subj.period_scale
        volts, _ = sensor_response(4.0, 1.0 / period, model)
        chans = []
        for c in range(4):
            ph = phase + subj.phase_offset_s[c]
            takeoff = _pulse_train_single(t, period, ph, 0.030 * subj.width_scale, 1.0)
            landing = _pulse_train_single(
                t, period, ph + 0.25 * period, 0.024 * subj.width_scale, 1.3
            )
            chans.append(volts * subj.amp_scale[c] * (takeoff + landing))
        return np.stack(chans)
    if cls is GaitClass.FALLING_DOWN:
        volts, _ = sensor_response(5.0, 1.0, model)
        t_fall = phase % (0.2 * t[-1]) + 0.2 * t[-1]
        chans = []
        for c in range(4):
            burst = _pulse(t, t_fall + 0.03 * c + subj.phase_offset_s[c],
                           0.04 * subj.width_scale, 1.0)
            # faint post-impact wobble keeps the channel power nonzero
            wobble = 0.01 * np.sin(2 * np.pi * 0.8 * (t - t_fall) + c)
            wobble *= t > t_fall
            chans.append(volts * subj.amp_scale[c] * (burst + wobble))
        return np.stack(chans)
    if cls is GaitClass.TAI_CHI:
        volts, _ = sensor_response(1.5, 1.0, model)
        f0 = 0.2 / subj.period_scale
        chans = []
        for c in range(4):
            ph = 2 * np.pi * (0.25 * c) + 2 * np.pi * f0 * (phase + subj.phase_offset_s[c])
            x = (0.45 * np.sin(2 * np.pi * f0 * t + ph)
                 + 0.35 * np.sin(2 * np.pi * 2 * f0 * t + 1.7 * ph)
                 + 0.20 * np.sin(2 * np.pi * 3 * f0 * t + 0.6 * ph)
                 + 0.12 * np.sin(2 * np.pi * 4 * f0 * t + 2.1 * ph))
            chans.append(0.35 * volts * subj.amp_scale[c] * x)
        return np.stack(chans)
    raise InvalidSpec(f"unknown class {cls}")


def _lowpass_ema(x: np.ndarray, fs: float, cutoff_hz: float) -> np.ndarray:
    alpha = 1.0 - np.exp(-2.0 * np.pi * cutoff_hz / fs)
    out = np.empty_like(x)
    acc = x[0]
    for i, v in enumerate(x):
        acc += alpha * (v - acc)
        out[i] = acc
    return out


def synth_record_parts(cls: GaitClass, subject: SubjectProfile,
                       duration_s: float = 6.0, fs: float = 100.0,
                       noise: float = 1.0, drift: float = 0.0,
                       seed: int = 0, model: SensorModel = DEFAULT_SENSOR):
    """Generate one record and return (record, clean, noise, drift) arrays.

    The white-noise floor is calibrated per channel so the clean-to-noise
    power ratio equals the sensor model's target SNR when noise=1.
    """
    n = int(round(duration_s * fs))
    if n < 256:
        raise InvalidSpec("duration*fs must be at least 256 samples")
    rng = np.random.Generator(np.random.PCG64(seed))
    t = np.arange(n) / fs
    phase = float(rng.uniform(0.0, 2.0))
    clean = _template(cls, subject, t, phase, model)
    if subject.tremor_depth > 0:
        trem = np.sin(2 * np.pi * subject.tremor_freq_hz * t
                      + rng.uniform(0, 2 * np.pi))
        clean = clean * (1.0 + subject.tremor_depth * trem)
        clean += (0.02 * subject.tremor_depth
                  * np.max(np.abs(clean), axis=1, keepdims=True) * trem)
    noise_arr = np.zeros_like(clean)
    if noise > 0:
        target = 10.0 ** (model.target_snr_db / 10.0)
        white = rng.standard_normal(clean.shape)
        ps = np.mean(clean**2, axis=1, keepdims=True)
        pn = np.mean(white**2, axis=1, keepdims=True)
        noise_arr = white * np.sqrt(ps / (pn * target)) * noise
    drift_arr = np.zeros_like(clean)
    if drift > 0:
        walk = np.cumsum(rng.standard_normal(clean.shape), axis=1)
        for c in range(4):
            drift_arr[c] = _lowpass_ema(walk[c], fs, 0.2)
        drift_arr -= drift_arr.mean(axis=1, keepdims=True)
        peak = np.max(np.abs(drift_arr), axis=1, keepdims=True)
        peak[peak == 0] = 1.0
        drift_arr = drift_arr / peak * np.max(np.abs(clean), axis=1, keepdims=True) * drift
    total = clean + noise_arr + drift_arr
    record = MultiChannelRecord(
        tuple(Signal(total[c], fs) for c in range(4)),
        label=cls.name,
        subject=subject.subject_id if subject.subject_id >= 0 else None,
    )
    return record, clean, noise_arr, drift_arr


def synth_record(cls: GaitClass, subject: SubjectProfile,
                 duration_s: float = 6.0, fs: float = 100.0,
                 noise: float = 1.0, drift: float = 0.0, seed: int = 0,
                 model: SensorModel = DEFAULT_SENSOR) -> MultiChannelRecord:
    """Deterministic labeled 4-channel record; see synth_record_parts."""
    return synth_record_parts(cls, subject, duration_s, fs, noise, drift,
                              seed, model)[0]


def subject_template(subject: SubjectProfile, duration_s: float = 5.0,
                     fs: float = 100.0) -> Signal:
    """Clean, phase-aligned walking trace (knee channel) for one subject."""
    t = np.arange(int(round(duration_s * fs))) / fs
    clean = _template(GaitClass.NORMAL_WALKING, subject, t, 0.0, DEFAULT_SENSOR)
    return Signal(clean[2], fs)


@dataclass(frozen=True)
class DatasetSpec:
    """Sizing and calibration of a generated posture dataset."""

    classes: tuple = tuple(GaitClass)
    samples_per_class: int = 100
    subjects: tuple = field(default_factory=lambda: tuple(default_subjects()))
    duration_s: float = 6.0
    sample_rate_hz: float = 100.0
    noise: float = 1.0
    drift: float = 0.0
    seed: int = 0
    train_fraction: float = 0.8

    def __post_init__(self):
        if not (0.0 < self.train_fraction < 1.0):
            raise InvalidSpec("train_fraction must be in (0, 1)")


def _record_seed(base: int, class_idx: int, sample_idx: int) -> int:
    ss = np.random.SeedSequence(entropy=(base, class_idx, sample_idx))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def synth_dataset(spec: DatasetSpec = DatasetSpec()):
    """Stratified (train, test) lists of labeled records, deterministic in seed."""
    if spec.samples_per_class < 5:
        raise TooFew("need at least 5 samples per class")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    train, test = [], []
    n_train = int(round(spec.train_fraction * spec.samples_per_class))
    for ci, cls in enumerate(spec.classes):
        records = []
        for i in range(spec.samples_per_class):
            subj = spec.subjects[i % len(spec.subjects)]
            records.append(
                synth_record(cls, subj, spec.duration_s, spec.sample_rate_hz,
                             spec.noise, spec.drift,
                             seed=_record_seed(spec.seed, ci, i))
            )
        order = rng.permutation(spec.samples_per_class)
        train.extend(records[i] for i in order[:n_train])
        test.extend(records[i] for i in order[n_train:])
    return train, test


def synth_identity_set(subjects=None, sets: int = 50, fs: float = 100.0,
                       seed: int = 0, noise: float = 1.0):
    """Identity-recognition corpus: per subject, `sets` records of 500x4 samples.

    Returns (train, test) with a 40/10-per-subject split when sets=50
    (4:1 in general).
    """
    if subjects is None:
        subjects = default_subjects()
    keys = {(s.period_scale, s.amp_scale, s.phase_offset_s, s.tremor_freq_hz,
             s.tremor_depth, s.accent, s.width_scale) for s in subjects}
    if len(keys) != len(subjects):
        raise InvalidSpec("subject profiles must be distinct")
    rng = np.random.Generator(np.random.PCG64(seed))
    n_test = max(1, sets // 5)
    train, test = [], []
    for si, subj in enumerate(subjects):
        records = [
            synth_record(GaitClass.NORMAL_WALKING, subj, duration_s=500 / fs,
                         fs=fs, noise=noise,
                         seed=_record_seed(seed, 1000 + si, i))
            for i in range(sets)
        ]
        order = rng.permutation(sets)
        train.extend(records[i] for i in order[: sets - n_test])
        test.extend(records[i] for i in order[sets - n_test:])
    return train, test
