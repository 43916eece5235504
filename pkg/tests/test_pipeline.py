import csv

import numpy as np
import pytest

from gaitsense.errors import NoBeats, TooShort
from gaitsense.nn.model import Model, ModelConfig
from gaitsense.pipeline import (
    classify,
    export_features,
    heart_rate,
    identify,
    preprocess,
    pulse_waveform,
)
from gaitsense.signal import Signal
from gaitsense.synth import GaitClass, default_subjects, synth_record


def walking_record(seed=0, duration=6.0):
    return synth_record(GaitClass.NORMAL_WALKING, default_subjects()[0],
                        duration_s=duration, seed=seed)


class TestPreprocess:
    def test_output_shape(self):
        s = preprocess(walking_record())
        assert s.values.shape == (220,)
        assert s.label == "NORMAL_WALKING"
        assert s.subject == 0

    def test_normalized_range(self):
        s = preprocess(walking_record())
        assert np.max(np.abs(s.values)) <= 1.0 + 1e-12

    def test_too_short(self):
        rec = synth_record(GaitClass.NORMAL_WALKING, default_subjects()[0],
                           duration_s=3.0, seed=0)
        with pytest.raises(TooShort):
            preprocess(rec)

    def test_deterministic(self):
        a = preprocess(walking_record(seed=4))
        b = preprocess(walking_record(seed=4))
        assert np.array_equal(a.values, b.values)

    def test_no_denoise_differs(self):
        rec = walking_record(seed=5)
        a = preprocess(rec, denoise=True)
        b = preprocess(rec, denoise=False)
        assert not np.array_equal(a.values, b.values)


class TestHeartRate:
    def test_clean_60(self):
        r = heart_rate(pulse_waveform(60.0, 30.0, 250.0))
        assert r.bpm == pytest.approx(60.0, abs=0.5)
        assert r.valid

    def test_clean_90(self):
        r = heart_rate(pulse_waveform(90.0, 30.0, 250.0))
        assert r.bpm == pytest.approx(90.0, abs=0.5)

    def test_noisy_60_within_3(self):
        for seed in range(5):
            r = heart_rate(pulse_waveform(60.0, 30.0, 250.0,
                                          noise_db=15.0, seed=seed))
            assert r.bpm == pytest.approx(60.0, abs=3.0)

    def test_amplitude_invariant(self):
        s = pulse_waveform(72.0, 30.0, 250.0)
        a = heart_rate(s)
        b = heart_rate(s.with_samples(25.0 * s.samples))
        assert a.bpm == pytest.approx(b.bpm)

    def test_too_short_raises(self):
        with pytest.raises(NoBeats):
            heart_rate(pulse_waveform(60.0, 3.0, 250.0))

    def test_flat_raises(self):
        with pytest.raises(NoBeats):
            heart_rate(Signal(np.ones(2500), 250.0))

    def test_confidence_drops_with_noise(self):
        clean = heart_rate(pulse_waveform(60.0, 30.0, 250.0))
        noisy = heart_rate(pulse_waveform(60.0, 30.0, 250.0, noise_db=10.0))
        assert clean.confidence > noisy.confidence


class TestClassifyIdentify:
    def test_classify_returns_enum_and_distribution(self):
        model = Model(ModelConfig(), seed=0)
        cls, conf, probs = classify(model, walking_record())
        assert isinstance(cls, GaitClass)
        assert 0.0 < conf <= 1.0
        assert probs.shape == (8,)
        assert probs.sum() == pytest.approx(1.0)

    def test_identify_returns_subject(self):
        model = Model(ModelConfig(n_classes=5), seed=0)
        subject, conf = identify(model, walking_record())
        assert subject in range(5)
        assert 0.0 < conf <= 1.0


@pytest.fixture(scope="module")
def samples():
    return [preprocess(walking_record(seed=s), denoise=False)
            for s in range(3)]


class TestExportFeatures:

    @pytest.mark.parametrize("tap,width", [
        ("input", 220),
        ("conv", 55 * 16),
        ("bilstm", 55 * 64),
        ("attention", 128),
    ])
    def test_tap_widths(self, tmp_path, samples, tap, width):
        model = Model(ModelConfig(), seed=0)
        path = tmp_path / f"{tap}.csv"
        n = export_features(model, samples, tap, path)
        assert n == 3
        rows = list(csv.reader(path.open()))
        assert len(rows) == 3
        assert all(len(r) == 2 + width for r in rows)
        assert rows[0][0] == "NORMAL_WALKING" and rows[0][1] == "0"

    def test_unknown_tap(self, tmp_path, samples):
        model = Model(ModelConfig(), seed=0)
        with pytest.raises(ValueError):
            export_features(model, samples, "nope", tmp_path / "x.csv")
