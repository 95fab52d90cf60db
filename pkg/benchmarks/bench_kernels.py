"""Benchmark the numba kernels against the pure-numpy fallback.

The accelerated path is selected at import time by WAVEGS_NO_NUMBA, so the
comparison runs each mode in a fresh subprocess and reports wall times and
speedups.  Usage:

    python3 benchmarks/bench_kernels.py            # run both modes, print table
    python3 benchmarks/bench_kernels.py --worker   # internal: time current mode
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _time(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run_worker():
    import numpy as np

    from wavegs import _accel

    rng = np.random.default_rng(0)
    timings = {"numba": _accel.NUMBA_ENABLED}

    v = rng.standard_normal(2_000_000)
    amps = np.array([1.0, 0.4])
    exps = np.array([3.0, 4.5])
    _accel.quasipoly_f(v[:16], amps, exps)  # compile outside the timer
    _accel.quasipoly_prim(v[:16], amps, exps)
    timings["quasipoly_f_2e6"] = _time(lambda: _accel.quasipoly_f(v, amps, exps))
    timings["quasipoly_prim_2e6"] = _time(lambda: _accel.quasipoly_prim(v, amps, exps))

    nu = np.arange(0, 120, dtype=np.int64)
    _accel.torus_l_sums(nu[:4], 2, 2.0)
    timings["torus_l_sums_120"] = _time(lambda: _accel.torus_l_sums(nu, 2, 2.0))

    js = np.arange(-64, 65, dtype=np.int64)
    _accel.sphere_series_inner(js[:3], 3, 1, 3.0, 1.0, 100, True)
    timings["sphere_series_kg_l2e4"] = _time(
        lambda: _accel.sphere_series_inner(js, 3, 1, 3.0, 1.0, 20000, True)
    )

    _accel.gap_ratio_scan(2, 2, 100)
    timings["gap_ratio_scan_l1e4"] = _time(lambda: _accel.gap_ratio_scan(2, 2, 10000))

    mask = (rng.uniform(size=(1024, 1024)) < 0.4).astype(np.uint8)
    _accel.char_slice_counts(mask[:64, :64].copy())
    timings["char_slices_1024"] = _time(lambda: _accel.char_slice_counts(mask))

    print(json.dumps(timings))


def run_comparison():
    results = {}
    for mode, env_val in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, WAVEGS_NO_NUMBA=env_val)
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker"],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        results[mode] = json.loads(out.stdout.strip().splitlines()[-1])
    if not results["numba"].pop("numba"):
        print("warning: numba unavailable, both columns are the numpy path")
    results["numpy"].pop("numba")

    keys = [k for k in results["numba"] if k in results["numpy"]]
    width = max(len(k) for k in keys)
    print(f"{'kernel':<{width}}  {'numba [ms]':>12}  {'numpy [ms]':>12}  {'speedup':>8}")
    for k in keys:
        tn = results["numba"][k] * 1e3
        tp = results["numpy"][k] * 1e3
        print(f"{k:<{width}}  {tn:12.2f}  {tp:12.2f}  {tp/tn:7.1f}x")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--worker", action="store_true")
    args = parser.parse_args()
    if args.worker:
        run_worker()
    else:
        run_comparison()
