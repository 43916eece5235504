"""Single command-line entry point: `gaitsense <subcommand>`.

Every capability is scriptable from here: dataset synthesis, signal
decomposition, model training and evaluation, the streaming gateway and
its simulated nodes, and benchmarks. No prompts; errors come out as a
single `error: ...` line on stderr with a nonzero exit code.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import threading
import time

import numpy as np

from .backend import BACKEND_NAME
from .emd import SiftConfig, denoise_baseline, dominant_frequency, emd
from .errors import GaitsenseError, InvalidInput
from .signal import (
    MultiChannelRecord,
    Signal,
    correlation_matrix,
    read_record_csv,
    snr_db,
    write_record_csv,
    write_signal_csv,
)
from .synth import (
    DatasetSpec,
    GaitClass,
    default_subjects,
    synth_dataset,
    synth_identity_set,
    synth_record,
)
from .transform import WaveletConfig, stft, wavelet_denoise

__all__ = ["main"]


def _load_channel(path, channel: int | None) -> Signal:
    loaded = read_record_csv(path)
    if isinstance(loaded, Signal):
        return loaded
    if channel is None:
        raise InvalidInput(f"{path} has 4 channels; pass --channel 1..4")
    if not (1 <= channel <= 4):
        raise InvalidInput("--channel must be 1..4")
    return loaded.channels[channel - 1]


# -- dataset directories -----------------------------------------------------


def _write_dataset(out_dir, kind, train, test, meta) -> None:
    records = []
    for split, recs in (("train", train), ("test", test)):
        sub = os.path.join(out_dir, split)
        os.makedirs(sub, exist_ok=True)
        for i, rec in enumerate(recs):
            rel = os.path.join(split, f"rec_{i:05d}.csv")
            write_record_csv(os.path.join(out_dir, rel), rec)
            records.append(
                {"path": rel, "label": rec.label, "subject": rec.subject,
                 "split": split}
            )
    manifest = {"kind": kind, "records": records, **meta}
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1)


def _read_dataset(dataset_dir, split: str | None = None):
    path = os.path.join(dataset_dir, "manifest.json")
    with open(path) as fh:
        manifest = json.load(fh)
    records = []
    for entry in manifest["records"]:
        if split is not None and entry["split"] != split:
            continue
        rec = read_record_csv(os.path.join(dataset_dir, entry["path"]))
        if isinstance(rec, Signal):
            raise InvalidInput(f"{entry['path']} is single-channel")
        rec = MultiChannelRecord(rec.channels, label=entry["label"],
                                 subject=entry["subject"])
        records.append(rec)
    return manifest, records


def _labels_for(manifest, records) -> np.ndarray:
    if manifest["kind"] == "identity":
        return np.array([r.subject for r in records])
    return np.array([GaitClass[r.label].value for r in records])


def _prepare(records, denoise: bool) -> np.ndarray:
    from .pipeline import preprocess

    xs = [preprocess(r, denoise=denoise).values for r in records]
    return np.stack(xs).reshape(len(xs), -1, 1)


# -- subcommand handlers -----------------------------------------------------


def _cmd_synth(args) -> int:
    if args.identity:
        train, test = synth_identity_set(sets=args.sets, seed=args.seed,
                                         noise=args.noise)
        meta = {"n_classes": len(default_subjects()), "seed": args.seed,
                "sets": args.sets}
        _write_dataset(args.out_dir, "identity", train, test, meta)
    elif args.record is not None:
        cls = GaitClass[args.record]
        subj = default_subjects()[args.subject]
        rec = synth_record(cls, subj, args.duration, args.fs, args.noise,
                           args.drift, seed=args.seed)
        write_record_csv(args.out, rec)
        print(f"wrote {args.out}")
        return 0
    else:
        spec = DatasetSpec(samples_per_class=args.samples_per_class,
                           duration_s=args.duration,
                           sample_rate_hz=args.fs, noise=args.noise,
                           drift=args.drift, seed=args.seed,
                           train_fraction=args.train_fraction)
        train, test = synth_dataset(spec)
        meta = {"n_classes": len(spec.classes), "seed": args.seed,
                "samples_per_class": spec.samples_per_class,
                "duration_s": spec.duration_s,
                "sample_rate_hz": spec.sample_rate_hz,
                "noise": spec.noise, "drift": spec.drift,
                "train_fraction": spec.train_fraction}
        _write_dataset(args.out_dir, "posture", train, test, meta)
    print(f"wrote {len(train)} train + {len(test)} test records to {args.out_dir}")
    return 0


def _cmd_emd(args) -> int:
    s = _load_channel(args.infile, args.channel)
    cfg = SiftConfig(drift_cutoff_hz=args.drift_cutoff)
    d = emd(s, cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    total = float(np.dot(s.samples, s.samples)) or 1.0
    summary = {"imfs": [], "input_samples": len(s),
               "sample_rate_hz": s.sample_rate_hz}
    for i, imf in enumerate(d.imfs, start=1):
        name = f"imf_{i:02d}.csv"
        write_signal_csv(os.path.join(args.out_dir, name), imf)
        summary["imfs"].append({
            "file": name,
            "dominant_frequency_hz": dominant_frequency(imf),
            "energy_fraction": float(np.dot(imf.samples, imf.samples)) / total,
        })
    write_signal_csv(os.path.join(args.out_dir, "residual.csv"), d.residual)
    summary["residual"] = {
        "file": "residual.csv",
        "energy_fraction": float(np.dot(d.residual.samples,
                                        d.residual.samples)) / total,
    }
    if args.denoise_out:
        write_signal_csv(args.denoise_out, denoise_baseline(s, cfg))
        summary["denoised"] = args.denoise_out
    with open(os.path.join(args.out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1)
    print(f"wrote {len(d.imfs)} IMFs + residual to {args.out_dir}")
    return 0


def _cmd_stft(args) -> int:
    s = _load_channel(args.infile, args.channel)
    spec = stft(s, window_len=args.window, hop=args.hop)
    with open(args.out, "w") as fh:
        fh.write(f"# W={spec.window_len},H={spec.hop},"
                 f"fs={spec.sample_rate_hz:g},window={spec.window}\n")
        for row in spec.magnitudes:
            fh.write(",".join(f"{v:.9g}" for v in row) + "\n")
    print(f"wrote {spec.frames} frames x {spec.bins} bins to {args.out}")
    return 0


def _cmd_wavelet(args) -> int:
    s = _load_channel(args.infile, args.channel)
    block = 1 << args.levels
    usable = (len(s) // block) * block
    if usable == 0:
        raise InvalidInput(f"signal too short for {args.levels} levels")
    if usable != len(s):
        s = s.with_samples(s.samples[:usable])
        print(f"note: truncated to {usable} samples "
              f"(multiple of 2^{args.levels})", file=sys.stderr)
    cfg = WaveletConfig(levels=args.levels, threshold=args.threshold)
    write_signal_csv(args.out, wavelet_denoise(s, cfg))
    print(f"wrote {args.out}")
    return 0


def _cmd_snr(args) -> int:
    clean = read_record_csv(args.clean)
    noisy = read_record_csv(args.noisy)
    if isinstance(clean, Signal) != isinstance(noisy, Signal):
        raise InvalidInput("clean and noisy inputs must have matching shape")
    if isinstance(clean, Signal):
        pairs = [(clean, noisy)]
    else:
        pairs = list(zip(clean.channels, noisy.channels))
    out = []
    for i, (c, n) in enumerate(pairs, start=1):
        noise = n.with_samples(n.samples - c.samples)
        out.append({"channel": i, "snr_db": snr_db(c, noise).snr_db})
    print(json.dumps(out))
    return 0


def _cmd_corr(args) -> int:
    rec = read_record_csv(args.infile)
    if isinstance(rec, Signal):
        raise InvalidInput("correlation matrix needs a 4-channel record")
    mat = correlation_matrix(list(rec.channels))
    writer = csv.writer(sys.stdout if args.out is None else open(args.out, "w"))
    for row in mat:
        writer.writerow([f"{v:.6f}" for v in row])
    return 0


def _cmd_train(args) -> int:
    from .nn.model import Model, ModelConfig, save_model
    from .nn.train import TrainConfig, train as train_model

    manifest, records = _read_dataset(args.dataset, split="train")
    n_classes = args.classes or manifest["n_classes"]
    x = _prepare(records, denoise=not args.no_denoise)
    y = _labels_for(manifest, records)
    model = Model(ModelConfig(n_classes=n_classes), seed=args.seed)
    cfg = TrainConfig(epochs=args.epochs, seed=args.seed)
    history = train_model(model, x, y, cfg, verbose=args.verbose)
    save_model(model, args.out)
    last = history[-1]
    print(f"trained {len(history)} epochs, final loss {last['loss']:.4f} "
          f"acc {last['accuracy']:.4f}; wrote {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    from .nn.model import Model, ModelConfig
    from .nn.train import TrainConfig, evaluate, train as train_model

    manifest, train_recs = _read_dataset(args.dataset, split="train")
    _, test_recs = _read_dataset(args.dataset, split="test")
    xtr = _prepare(train_recs, denoise=not args.no_denoise)
    ytr = _labels_for(manifest, train_recs)
    xte = _prepare(test_recs, denoise=not args.no_denoise)
    yte = _labels_for(manifest, test_recs)
    n_classes = manifest["n_classes"]

    grids = {
        "filters": [16, 32, 64, 128],
        "kernel": [8, 16, 32, 64],
        "layers": [1, 2, 3],
    }
    base = ModelConfig(n_classes=n_classes)
    rows = []
    for value in grids[args.axis]:
        if args.axis == "filters":
            blocks = ((value, 32), (16, 32))
        elif args.axis == "kernel":
            blocks = ((64, value), (16, value))
        else:
            blocks = tuple((64 if i == 0 else 16, 32) for i in range(value))
        cfg = ModelConfig(conv_blocks=blocks, n_classes=n_classes)
        model = Model(cfg, seed=args.seed)
        train_model(model, xtr, ytr,
                    TrainConfig(epochs=args.epochs, seed=args.seed))
        acc, _ = evaluate(model, xte, yte)
        rows.append({args.axis: value, "test_accuracy": acc,
                     "params": model.total_params()})
        print(f"{args.axis}={value}: test accuracy {acc:.4f}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    _ = base
    return 0


def _cmd_eval(args) -> int:
    from .nn.model import load_model
    from .nn.train import evaluate

    model = load_model(args.model)
    manifest, records = _read_dataset(args.dataset, split=args.split)
    x = _prepare(records, denoise=not args.no_denoise)
    y = _labels_for(manifest, records)
    acc, cm = evaluate(model, x, y)
    print(f"accuracy {acc:.4f} on {len(records)} records")
    if args.confusion:
        with open(args.confusion, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in cm.counts:
                writer.writerow(row.tolist())
    return 0


def _cmd_infer(args) -> int:
    from .nn.model import load_model
    from .pipeline import classify

    model = load_model(args.model)
    rec = read_record_csv(args.infile)
    if isinstance(rec, Signal):
        raise InvalidInput("inference needs a 4-channel record")
    cls, conf, probs = classify(model, rec, denoise=not args.no_denoise)
    print(json.dumps({"class": cls.name, "confidence": round(conf, 6),
                      "probabilities": [round(float(p), 6) for p in probs]}))
    return 0


def _cmd_export_features(args) -> int:
    from .nn.model import load_model
    from .pipeline import export_features, preprocess

    model = load_model(args.model)
    _, records = _read_dataset(args.dataset, split=args.split)
    samples = [preprocess(r, denoise=not args.no_denoise) for r in records]
    n = export_features(model, samples, args.tap, args.out)
    print(f"wrote {n} rows to {args.out}")
    return 0


def _cmd_serve(args) -> int:
    from .gateway.server import Gateway, GatewayConfig

    if args.config:
        cfg = GatewayConfig.from_json(args.config)
    else:
        cfg = GatewayConfig(node_port=args.node_port,
                            terminal_port=args.terminal_port,
                            model_path=args.model,
                            identity_model_path=args.identity_model)
    cfg.apply_env()
    gw = Gateway(cfg).start()
    print(f"gateway listening: nodes {gw.node_port}, terminals {gw.terminal_port}",
          flush=True)
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        gw.stop()
    return 0


def _cmd_node(args) -> int:
    from .gateway.nodes import run_gps_node, run_heart_node, run_sensor_node

    endpoint = (args.host, args.port)
    if args.kind == "sensor":
        n = run_sensor_node(endpoint, cls=GaitClass[args.gait_class],
                            duration_s=args.duration, seed=args.seed)
    elif args.kind == "gps":
        n = run_gps_node(endpoint, duration_s=args.duration)
    else:
        n = run_heart_node(endpoint, bpm=args.bpm, duration_s=args.duration,
                           seed=args.seed)
    print(f"sent {n} frames")
    return 0


def _cmd_terminal(args) -> int:
    from .gateway.terminal import collect_events

    events = collect_events((args.host, args.port), args.duration)
    sink = sys.stdout if args.out is None else open(args.out, "w")
    for event in events:
        sink.write(json.dumps(event) + "\n")
    if sink is not sys.stdout:
        sink.close()
        print(f"wrote {len(events)} events to {args.out}")
    return 0


def _cmd_bench(args) -> int:
    from .gateway.nodes import run_sensor_node
    from .gateway.server import Gateway, GatewayConfig
    from .gateway.terminal import collect_events

    cfg = GatewayConfig(node_port=0, terminal_port=0, model_path=args.model)
    with Gateway(cfg) as gw:
        stop = threading.Event()
        workers = [
            threading.Thread(
                target=run_sensor_node,
                args=(("127.0.0.1", gw.node_port),),
                kwargs={"duration_s": args.duration, "seed": i, "stop": stop},
                daemon=True,
            )
            for i in range(args.nodes)
        ]
        for w in workers:
            w.start()
        events = collect_events(("127.0.0.1", gw.terminal_port), args.duration)
        stop.set()
    lats = [e["latency_ms"] for e in events if e.get("kind") == "posture"]
    if not lats:
        print("error: no posture events observed", file=sys.stderr)
        return 1
    lats = np.array(lats)
    report = {
        "nodes": args.nodes,
        "events": int(lats.size),
        "latency_ms": {
            "p50": float(np.percentile(lats, 50)),
            "p95": float(np.percentile(lats, 95)),
            "max": float(lats.max()),
        },
    }
    print(json.dumps(report))
    return 0


# -- parser ------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaitsense",
        description="Triboelectric gait monitoring toolkit "
                    f"(backend: {BACKEND_NAME})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("synth", _cmd_synth, "generate datasets or single records")
    p.add_argument("--out-dir", default="dataset")
    p.add_argument("--identity", action="store_true",
                   help="5-subject identity corpus instead of 8-class posture")
    p.add_argument("--sets", type=int, default=50,
                   help="records per subject for --identity")
    p.add_argument("--record", choices=[c.name for c in GaitClass],
                   help="write a single record of this class to --out")
    p.add_argument("--out", default="record.csv")
    p.add_argument("--subject", type=int, default=0)
    p.add_argument("--samples-per-class", type=int, default=100)
    p.add_argument("--duration", type=float, default=6.0)
    p.add_argument("--fs", type=float, default=100.0)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--drift", type=float, default=0.0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)

    p = add("emd", _cmd_emd, "decompose a signal into IMFs")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--channel", type=int, default=None)
    p.add_argument("--drift-cutoff", type=float, default=0.3)
    p.add_argument("--denoise-out", default=None,
                   help="also write the drift-removed signal here")

    p = add("stft", _cmd_stft, "write a spectrogram CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--channel", type=int, default=None)
    p.add_argument("--window", type=int, default=256)
    p.add_argument("--hop", type=int, default=128)

    p = add("wavelet", _cmd_wavelet, "wavelet-denoise a signal")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--channel", type=int, default=None)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--threshold", type=float, default=None)

    p = add("snr", _cmd_snr, "SNR of a noisy capture against its clean source")
    p.add_argument("--clean", required=True)
    p.add_argument("--noisy", required=True)

    p = add("corr", _cmd_corr, "4x4 channel correlation matrix")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None)

    p = add("train", _cmd_train, "train a classifier on a dataset directory")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--classes", type=int, default=None)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-denoise", action="store_true")
    p.add_argument("--verbose", action="store_true")

    p = add("sweep", _cmd_sweep, "accuracy across a conv hyperparameter grid")
    p.add_argument("--dataset", required=True)
    p.add_argument("--axis", choices=["filters", "kernel", "layers"],
                   required=True)
    p.add_argument("--epochs", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--no-denoise", action="store_true")

    p = add("eval", _cmd_eval, "accuracy and confusion matrix")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default="test", choices=["train", "test"])
    p.add_argument("--confusion", default=None)
    p.add_argument("--no-denoise", action="store_true")

    p = add("infer", _cmd_infer, "classify one record")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--no-denoise", action="store_true")

    p = add("export-features", _cmd_export_features,
            "dump activations at a tap point to CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default="test", choices=["train", "test"])
    p.add_argument("--tap", default="attention",
                   choices=["input", "conv", "bilstm", "attention"])
    p.add_argument("--out", required=True)
    p.add_argument("--no-denoise", action="store_true")

    p = add("serve", _cmd_serve, "run the streaming gateway")
    p.add_argument("--config", default=None, help="GatewayConfig JSON file")
    p.add_argument("--node-port", type=int, default=7701)
    p.add_argument("--terminal-port", type=int, default=7702)
    p.add_argument("--model", default="model.bin")
    p.add_argument("--identity-model", default=None)

    p = add("node", _cmd_node, "simulate a sensor, GPS, or heart node")
    p.add_argument("--kind", choices=["sensor", "gps", "heart"],
                   default="sensor")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--gait-class", choices=[c.name for c in GaitClass],
                   default="NORMAL_WALKING")
    p.add_argument("--bpm", type=float, default=60.0)
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)

    p = add("terminal", _cmd_terminal, "subscribe to the gateway event stream")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--duration", type=float, default=10.0)
    p.add_argument("--out", default=None)

    p = add("bench", _cmd_bench, "end-to-end latency report")
    p.add_argument("--what", choices=["latency"], default="latency")
    p.add_argument("--model", default="model.bin")
    p.add_argument("--nodes", type=int, default=4)
    p.add_argument("--duration", type=float, default=20.0)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GaitsenseError, OSError, ValueError, KeyError,
            ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
