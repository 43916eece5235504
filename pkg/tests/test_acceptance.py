"""Acceptance suite: twelve numbered end-to-end checks.

Each test prints a single PASS/FAIL line (visible with `pytest -s` or in
captured output) and then asserts, so a red run still reports every
criterion's verdict.
"""

import random
import threading
import time

import numpy as np
import pytest

from gaitsense.emd import emd, denoise_baseline, oscillation_counts_ok
from gaitsense.errors import ProtocolError
from gaitsense.gateway.framing import (
    EventMessage,
    GpsLine,
    HeartSample,
    SensorPacket,
    decode_frame,
    encode_frame,
)
from gaitsense.gateway.nmea import make_gga, parse_nmea
from gaitsense.gateway.nodes import run_sensor_node
from gaitsense.gateway.server import Gateway, GatewayConfig
from gaitsense.gateway.terminal import collect_events
from gaitsense.nn.gradcheck import check_layer_gradients
from gaitsense.nn.layers import (
    AdditiveAttention,
    BatchNorm1D,
    BiLSTM,
    Conv1D,
    Dense,
    Dropout,
    MaxPool1D,
    ReLU,
)
from gaitsense.nn.model import Model, ModelConfig
from gaitsense.pipeline import heart_rate, pulse_waveform
from gaitsense.signal import Signal, pearson, snr_db
from gaitsense.synth import (
    GaitClass,
    default_subjects,
    sensor_response,
    synth_record_parts,
)
from gaitsense.transform import dft, dwt, fft, idwt, stft


def _verdict(num: int, name: str, ok: bool, detail: str = ""):
    state = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"criterion {num:02d} [{name}]: {state}{suffix}")
    assert ok, f"criterion {num:02d} {name}{suffix}"


def test_criterion_01_parameter_counts():
    counts = Model(ModelConfig(), seed=0).param_counts()
    expected = {"conv_0": 2112, "batchnorm_0": 256, "conv_1": 32784,
                "batchnorm_1": 64, "bilstm_0": 12544, "bilstm_1": 24832,
                "dense": 1032}
    mismatches = {k: (counts.get(k), v) for k, v in expected.items()
                  if counts.get(k) != v}
    _verdict(1, "parameter counts", not mismatches, str(mismatches))


def test_criterion_02_gradient_oracle():
    rng = np.random.default_rng(0)

    class _FixedMaskRng:
        def __init__(self):
            self._draw = None

        def random(self, shape):
            if self._draw is None or self._draw.shape != shape:
                self._draw = rng.random(shape)
            return self._draw

    def shapes(n):
        for _ in range(n):
            yield (int(rng.integers(1, 4)), int(rng.integers(4, 9)),
                   int(rng.integers(1, 5)))

    worst = 0.0
    for b, t, c in shapes(20):
        x = rng.standard_normal((b, t, c))
        k = int(rng.integers(1, t + 1))
        f = int(rng.integers(1, 5))
        worst = max(worst, check_layer_gradients(Conv1D(c, f, k, rng), x, rng=rng))
    for b, t, c in shapes(20):
        x = rng.standard_normal((b, t, c))
        worst = max(worst, check_layer_gradients(BatchNorm1D(c), x,
                                                 training=True, rng=rng))
    for b, t, c in shapes(20):
        x = rng.standard_normal((b, t, c))
        worst = max(worst, check_layer_gradients(MaxPool1D(2), x, rng=rng))
    for b, t, c in shapes(20):
        x = rng.standard_normal((b, t, c)) + 0.05
        worst = max(worst, check_layer_gradients(ReLU(), x, rng=rng))
    for b, t, c in shapes(20):
        x = rng.standard_normal((b, t, c))
        layer = Dropout(float(rng.uniform(0.1, 0.5)), _FixedMaskRng())
        worst = max(worst, check_layer_gradients(layer, x, training=True,
                                                 rng=rng))
    for b, _, c in shapes(20):
        d_out = int(rng.integers(1, 6))
        x = rng.standard_normal((b, c))
        worst = max(worst, check_layer_gradients(Dense(c, d_out, rng), x,
                                                 rng=rng))
    for b, t, c in shapes(20):
        h = int(rng.integers(1, 5))
        x = rng.standard_normal((b, t, c))
        worst = max(worst, check_layer_gradients(BiLSTM(c, h, rng), x, rng=rng))
    for b, t, c in shapes(20):
        h = int(rng.integers(1, 6))
        x = rng.standard_normal((b, t, c))
        worst = max(worst, check_layer_gradients(AdditiveAttention(c, h, rng),
                                                 x, rng=rng))
    _verdict(2, "gradient oracle", worst < 1e-4, f"max rel err {worst:.2e}")


def test_criterion_03_posture_accuracy(posture_run):
    acc = posture_run["accuracy"]
    elapsed = posture_run["elapsed_s"]
    ok = acc >= 0.95 and elapsed < 600.0
    _verdict(3, "posture classification", ok,
             f"accuracy {acc:.3f}, {elapsed:.0f}s")


def test_criterion_04_identity_accuracy(identity_run):
    acc = identity_run["accuracy"]
    elapsed = identity_run["elapsed_s"]
    ok = acc >= 0.95 and elapsed < 300.0
    _verdict(4, "identity recognition", ok,
             f"accuracy {acc:.3f}, {elapsed:.0f}s")


def test_criterion_05_emd_completeness():
    rng = np.random.default_rng(5)
    worst = 0.0
    imfs_ok = True
    for _ in range(100):
        n = int(rng.integers(128, 512))
        s = Signal(rng.standard_normal(n), 100.0)
        d = emd(s)
        total = sum(c.samples for c in d.components())
        worst = max(worst, float(np.max(np.abs(total - s.samples)))
                    / float(np.max(np.abs(s.samples))))
        imfs_ok = imfs_ok and all(oscillation_counts_ok(imf.samples)
                                  for imf in d.imfs)
    ok = worst < 1e-8 and imfs_ok
    _verdict(5, "EMD completeness", ok,
             f"max residual {worst:.2e}, IMF property {imfs_ok}")


def test_criterion_06_drift_removal():
    fs = 100.0
    t = np.arange(600) / fs
    worst = 1.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        f = rng.uniform(1.0, 8.0)
        amp = rng.uniform(0.5, 2.0)
        clean = amp * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
        out = denoise_baseline(Signal(clean + 0.5 * t, fs))
        worst = min(worst, pearson(out, Signal(clean, fs)))
    _verdict(6, "drift removal", worst >= 0.99, f"min correlation {worst:.4f}")


def test_criterion_07_transforms():
    rng = np.random.default_rng(7)
    lengths = [2, 4, 8, 16, 32, 64, 128, 256, 512, 1024]
    fft_err = 0.0
    for n in lengths:
        for _ in range(20):
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            fft_err = max(fft_err, float(np.max(np.abs(fft(x) - dft(x)))))
    dwt_err = 0.0
    for _ in range(20):
        s = Signal(rng.standard_normal(256), 100.0)
        back = idwt(dwt(s), s.sample_rate_hz)
        dwt_err = max(dwt_err, float(np.max(np.abs(back.samples - s.samples))))
    s = Signal(rng.standard_normal(1024), 256.0)
    spec = stft(s, window_len=256, hop=128)
    win = 0.5 * (1.0 - np.cos(2 * np.pi * np.arange(256) / 256))
    parseval_err = 0.0
    for fidx in range(spec.frames):
        frame = s.samples[fidx * 128 : fidx * 128 + 256] * win
        te = float(np.sum(frame**2))
        fe = float(np.sum(np.abs(fft(frame)) ** 2)) / 256
        parseval_err = max(parseval_err, abs(te - fe) / te)
    ok = fft_err < 1e-9 and dwt_err < 1e-10 and parseval_err < 1e-6
    _verdict(7, "transform correctness", ok,
             f"fft {fft_err:.1e}, dwt {dwt_err:.1e}, parseval {parseval_err:.1e}")


def test_criterion_08_synth_calibration():
    snr_ok = True
    worst = None
    for ci, cls in enumerate(GaitClass):
        subj = default_subjects()[ci % 5]
        _, clean, noise, _ = synth_record_parts(cls, subj, seed=ci)
        for c in range(4):
            got = snr_db(Signal(clean[c], 100.0), Signal(noise[c], 100.0)).snr_db
            if worst is None or abs(got - 31.2) > abs(worst - 31.2):
                worst = got
            snr_ok = snr_ok and abs(got - 31.2) <= 2.0
    v1, i1 = sensor_response(1.0, 1.0)
    v4, i4 = sensor_response(4.0, 4.0)
    endpoints_ok = (abs(v1 - 0.9) < 1e-12 and abs(v4 - 3.5) < 1e-12
                    and abs(i1 - 0.15) < 1e-12 and abs(i4 - 0.8) < 1e-12)
    ok = snr_ok and endpoints_ok
    _verdict(8, "synth calibration", ok,
             f"worst SNR {worst:.2f} dB, endpoints {endpoints_ok}")


def test_criterion_09_gateway_latency(posture_run):
    cfg = GatewayConfig(node_port=0, terminal_port=0,
                        model_path=posture_run["path"])
    with Gateway(cfg) as gw:
        stop = threading.Event()
        workers = [
            threading.Thread(
                target=run_sensor_node,
                args=(("127.0.0.1", gw.node_port),),
                kwargs={"duration_s": 60.0, "seed": i, "stop": stop},
                daemon=True,
            )
            for i in range(4)
        ]
        for w in workers:
            w.start()
        events = collect_events(("127.0.0.1", gw.terminal_port), 61.0)
        stop.set()
    lats = np.array([e["latency_ms"] for e in events
                     if e.get("kind") == "posture"])
    ok = lats.size > 50 and float(np.percentile(lats, 95)) < 1500.0
    p95 = float(np.percentile(lats, 95)) if lats.size else float("nan")
    _verdict(9, "gateway latency", ok,
             f"{lats.size} events, p95 {p95:.0f} ms")


def test_criterion_10_terminal_resilience(posture_run):
    cfg = GatewayConfig(node_port=0, terminal_port=0,
                        model_path=posture_run["path"],
                        status_interval_s=0.5)
    results = {}
    with Gateway(cfg) as gw:
        term_ep = ("127.0.0.1", gw.terminal_port)
        stop = threading.Event()

        def survivor(name):
            results[name] = collect_events(term_ep, 20.0)

        threads = [threading.Thread(target=survivor, args=(n,))
                   for n in ("a", "b")]
        doomed = threading.Thread(
            target=lambda: results.setdefault("doomed",
                                              collect_events(term_ep, 6.0)))
        for t in threads + [doomed]:
            t.start()
        time.sleep(1.0)
        node = threading.Thread(
            target=run_sensor_node,
            args=(term_ep[:1] + (gw.node_port,),),
            kwargs={"duration_s": 18.0, "seed": 0, "stop": stop},
            daemon=True,
        )
        node.start()
        for t in threads + [doomed]:
            t.join()
        stop.set()
    a, b = results["a"], results["b"]
    seqs_a = [e["seq"] for e in a]
    seqs_b = [e["seq"] for e in b]
    # compare over the span both observed
    lo = max(seqs_a[0], seqs_b[0])
    hi = min(seqs_a[-1], seqs_b[-1])
    span_a = [e for e in a if lo <= e["seq"] <= hi]
    span_b = [e for e in b if lo <= e["seq"] <= hi]
    identical = span_a == span_b
    gap_free = (len(span_a) == hi - lo + 1
                and [e["seq"] for e in span_a] == list(range(lo, hi + 1)))
    ok = identical and gap_free and len(span_a) > 10
    _verdict(10, "terminal resilience", ok,
             f"{len(span_a)} shared events, identical {identical}, "
             f"gap-free {gap_free}")


def test_criterion_11_protocol_robustness():
    rnd = random.Random(11)
    seeds = [
        encode_frame(SensorPacket(1234, 1, (0.1, 0.2, 0.3, 0.4))),
        encode_frame(HeartSample(1234, 1, 0.5)),
        encode_frame(GpsLine(make_gga(48.1173, 11.5167))),
        encode_frame(EventMessage({"kind": "status"})),
    ]
    overreads = crashes = 0
    for i in range(100_000):
        if i % 2 == 0:
            buf = bytearray(seeds[i // 2 % len(seeds)])
            for _ in range(rnd.randrange(1, 4)):
                buf[rnd.randrange(len(buf))] ^= 1 << rnd.randrange(8)
            buf = bytes(buf)
        else:
            buf = rnd.randbytes(rnd.randrange(0, 40))
        try:
            _, consumed = decode_frame(buf)
            if consumed > len(buf):
                overreads += 1
        except ProtocolError:
            pass
        except Exception:
            crashes += 1
    nmea_accepts = 0
    line = make_gga(48.1173, 11.5167)
    star = line.index("*")
    for _ in range(2000):
        i = rnd.randrange(1, star)
        mutated = line[:i] + chr(ord(line[i]) ^ (1 << rnd.randrange(7))) \
            + line[i + 1:]
        if mutated == line:
            continue
        try:
            parse_nmea(mutated)
            nmea_accepts += 1
        except ProtocolError:
            pass
    ok = overreads == 0 and crashes == 0 and nmea_accepts == 0
    _verdict(11, "protocol robustness", ok,
             f"overreads {overreads}, crashes {crashes}, "
             f"corrupted NMEA accepted {nmea_accepts}")


def test_criterion_12_heart_rate():
    # 300 Hz puts both beat periods on integer sample counts, so the
    # median inter-peak interval can be exact
    r60 = heart_rate(pulse_waveform(60.0, 30.0, 300.0))
    r90 = heart_rate(pulse_waveform(90.0, 30.0, 300.0))
    noisy_ok = True
    worst = 60.0
    for seed in range(5):
        r = heart_rate(pulse_waveform(60.0, 30.0, 300.0,
                                      noise_db=15.0, seed=seed))
        if abs(r.bpm - 60.0) > abs(worst - 60.0):
            worst = r.bpm
        noisy_ok = noisy_ok and abs(r.bpm - 60.0) <= 3.0
    ok = r60.bpm == 60.0 and r90.bpm == 90.0 and noisy_ok
    _verdict(12, "heart rate", ok,
             f"clean {r60.bpm:g}/{r90.bpm:g} bpm, worst noisy {worst:.2f}")
