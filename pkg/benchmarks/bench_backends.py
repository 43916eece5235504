"""Compare the compiled kernel core against the pure-numpy fallback.

Times the two hot kernels (natural cubic spline evaluation, extrema
scanning) head to head, then runs a full EMD in a subprocess per backend
so the import-time selection is exercised the same way users hit it.

Usage: python benchmarks/bench_backends.py [--repeats 200]
"""

import argparse
import json
import statistics
import subprocess
import sys
import time

import numpy as np


def time_call(fn, repeats):
    best = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best.append(time.perf_counter() - t0)
    return min(best), statistics.median(best)


def bench_kernels(repeats):
    from gaitsense import _kernels_py

    try:
        from gaitsense import _kernels
    except ImportError:
        _kernels = None

    rng = np.random.default_rng(0)
    sizes = [(20, 2_000), (100, 20_000), (400, 100_000)]
    rows = []
    for m, n in sizes:
        xk = np.sort(rng.choice(n, size=m, replace=False)).astype(float)
        yk = rng.standard_normal(m)
        x = rng.standard_normal(n)
        row = {"knots": m, "samples": n}
        for label, mod in (("compiled", _kernels), ("pure", _kernels_py)):
            if mod is None:
                continue
            spline_best, _ = time_call(lambda: mod.natural_cubic_eval(xk, yk, n),
                                       repeats)
            extrema_best, _ = time_call(lambda: mod.extrema_indices(x), repeats)
            row[f"spline_{label}_us"] = round(spline_best * 1e6, 1)
            row[f"extrema_{label}_us"] = round(extrema_best * 1e6, 1)
        if _kernels is not None:
            row["spline_speedup"] = round(
                row["spline_pure_us"] / row["spline_compiled_us"], 2)
            row["extrema_speedup"] = round(
                row["extrema_pure_us"] / row["extrema_compiled_us"], 2)
        rows.append(row)
    return rows


_EMD_SNIPPET = """
import time
import numpy as np
from gaitsense.backend import BACKEND_NAME
from gaitsense.emd import emd
from gaitsense.signal import Signal
rng = np.random.default_rng(0)
s = Signal(rng.standard_normal(2000), 100.0)
emd(s)  # warm up
t0 = time.perf_counter()
for _ in range(10):
    emd(s)
print(BACKEND_NAME, (time.perf_counter() - t0) / 10)
"""


def bench_emd():
    out = {}
    for env_val in (None, "1"):
        env = dict(PATH="/usr/bin:/bin")
        if env_val is not None:
            env["GAITSENSE_PURE"] = env_val
        proc = subprocess.run([sys.executable, "-c", _EMD_SNIPPET], env=env,
                              capture_output=True, text=True, check=True)
        name, seconds = proc.stdout.split()
        out[name] = round(float(seconds) * 1e3, 2)
    return out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    report = {
        "kernels": bench_kernels(args.repeats),
        "emd_ms_per_call": bench_emd(),
    }
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
