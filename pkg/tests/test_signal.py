import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gaitsense.errors import DegenerateInput, InvalidSignal, ShapeError
from gaitsense.signal import (
    MultiChannelRecord,
    Signal,
    correlation_matrix,
    normalize,
    pearson,
    read_record_csv,
    snr_db,
    write_record_csv,
    write_signal_csv,
)


def sig(values, fs=100.0):
    return Signal(np.asarray(values, dtype=float), fs)


class TestSignal:
    def test_rejects_nan(self):
        with pytest.raises(InvalidSignal):
            Signal(np.array([1.0, np.nan]), 100.0)

    def test_rejects_inf(self):
        with pytest.raises(InvalidSignal):
            Signal(np.array([1.0, np.inf]), 100.0)

    def test_rejects_bad_rate(self):
        with pytest.raises(InvalidSignal):
            Signal(np.zeros(4), 0.0)

    def test_casts_to_float64(self):
        s = Signal(np.array([1, 2, 3], dtype=np.int32), 10.0)
        assert s.samples.dtype == np.float64

    def test_duration(self):
        assert sig(np.zeros(200)).duration_s == 2.0


class TestRecord:
    def test_needs_four_channels(self):
        with pytest.raises(ShapeError):
            MultiChannelRecord((sig([1, 2]), sig([1, 2])))

    def test_needs_common_length(self):
        chans = tuple(sig(np.zeros(10)) for _ in range(3)) + (sig(np.zeros(9)),)
        with pytest.raises(ShapeError):
            MultiChannelRecord(chans)

    def test_as_array(self):
        rec = MultiChannelRecord(tuple(sig(np.full(5, c)) for c in range(4)))
        arr = rec.as_array()
        assert arr.shape == (4, 5)
        assert np.array_equal(arr[3], np.full(5, 3.0))


class TestNormalize:
    def test_peak_becomes_one(self):
        out = normalize(sig([0.0, -4.0, 2.0]))
        assert out.samples.max() <= 1.0
        assert np.isclose(np.abs(out.samples).max(), 1.0)

    def test_preserves_zero_baseline(self):
        out = normalize(sig([0.0, 2.0, 0.0, -1.0]))
        assert out.samples[0] == 0.0 and out.samples[2] == 0.0

    def test_all_zero_passthrough(self):
        out = normalize(sig(np.zeros(8)))
        assert np.array_equal(out.samples, np.zeros(8))

    @given(arrays(np.float64, st.integers(2, 64),
                  elements=st.floats(-1e6, 1e6)))
    @settings(max_examples=50, deadline=None)
    def test_idempotent(self, values):
        s = sig(values)
        once = normalize(s)
        twice = normalize(once)
        assert np.array_equal(once.samples, twice.samples)


class TestSnr:
    def test_known_ratio(self):
        s = sig(np.full(100, 2.0))
        n = sig(np.full(100, 0.2))
        assert snr_db(s, n).snr_db == pytest.approx(20.0)

    def test_scale_invariance(self):
        rng = np.random.default_rng(0)
        s, n = rng.standard_normal(64), rng.standard_normal(64)
        a = snr_db(sig(s), sig(n)).snr_db
        b = snr_db(sig(3.7 * s), sig(3.7 * n)).snr_db
        assert a == pytest.approx(b)

    def test_zero_noise_raises(self):
        with pytest.raises(ZeroDivisionError):
            snr_db(sig(np.ones(4)), sig(np.zeros(4)))


class TestPearson:
    def test_self(self):
        x = sig(np.random.default_rng(1).standard_normal(32))
        assert pearson(x, x) == pytest.approx(1.0)

    def test_negation(self):
        x = sig(np.random.default_rng(1).standard_normal(32))
        neg = x.with_samples(-x.samples)
        assert pearson(x, neg) == pytest.approx(-1.0)

    def test_hand_value(self):
        assert pearson(sig([1, 2, 3]), sig([1, 2, 4])) == pytest.approx(
            0.9820, abs=1e-4
        )

    def test_zero_variance_raises(self):
        with pytest.raises(DegenerateInput):
            pearson(sig([1, 1, 1]), sig([1, 2, 3]))

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            pearson(sig([1, 2]), sig([1, 2, 3]))

    @given(st.floats(0.1, 50.0), st.floats(-20.0, 20.0))
    @settings(max_examples=40, deadline=None)
    def test_affine_invariance(self, scale, shift):
        rng = np.random.default_rng(7)
        a = sig(rng.standard_normal(40))
        b = sig(rng.standard_normal(40))
        base = pearson(a, b)
        moved = pearson(a.with_samples(scale * a.samples + shift), b)
        assert moved == pytest.approx(base, abs=1e-9)


class TestCorrelationMatrix:
    def test_identical_pair(self):
        x = sig(np.random.default_rng(2).standard_normal(16))
        m = correlation_matrix([x, x])
        assert np.allclose(m, 1.0)

    def test_negation_pair(self):
        x = sig(np.random.default_rng(2).standard_normal(16))
        m = correlation_matrix([x, x.with_samples(-x.samples)])
        assert np.allclose(m, [[1, -1], [-1, 1]])

    def test_symmetric_unit_diagonal(self):
        rng = np.random.default_rng(3)
        sigs = [sig(rng.standard_normal(30)) for _ in range(4)]
        m = correlation_matrix(sigs)
        assert np.allclose(m, m.T)
        assert np.allclose(np.diag(m), 1.0)

    def test_positive_semidefinite(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            sigs = [sig(rng.standard_normal(25)) for _ in range(5)]
            eigvals = np.linalg.eigvalsh(correlation_matrix(sigs))
            assert eigvals.min() > -1e-9


class TestCsv:
    def test_record_roundtrip(self, tmp_path):
        rng = np.random.default_rng(5)
        rec = MultiChannelRecord(
            tuple(sig(rng.standard_normal(50)) for _ in range(4))
        )
        path = tmp_path / "rec.csv"
        write_record_csv(path, rec)
        back = read_record_csv(path)
        assert isinstance(back, MultiChannelRecord)
        assert back.sample_rate_hz == pytest.approx(100.0)
        for a, b in zip(rec.channels, back.channels):
            assert np.allclose(a.samples, b.samples, atol=1e-7)

    def test_signal_roundtrip(self, tmp_path):
        s = sig(np.random.default_rng(6).standard_normal(40), fs=200.0)
        path = tmp_path / "sig.csv"
        write_signal_csv(path, s)
        back = read_record_csv(path)
        assert isinstance(back, Signal)
        assert back.sample_rate_hz == pytest.approx(200.0)
        assert np.allclose(back.samples, s.samples, atol=1e-7)

    def test_header_format(self, tmp_path):
        rec = MultiChannelRecord(tuple(sig(np.zeros(3)) for _ in range(4)))
        path = tmp_path / "rec.csv"
        write_record_csv(path, rec)
        assert path.read_text().splitlines()[0] == "t,ch1,ch2,ch3,ch4"
