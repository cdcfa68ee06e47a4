#!/usr/bin/env python3
"""Benchmark the compiled rolling-window kernels against the numpy fallback.

The kernels sit inside the per-step quality-scoring loop of RL training, so
their throughput bounds the whole training wall time. Run:

    python3 benchmarks/bench_kernels.py [--sizes 512,4096,16384] [--reps 30]
"""

import argparse
import time

import numpy as np

from tsscrub.kernels import _pykernels

try:
    from tsscrub.kernels import _ckernels
except ImportError:
    _ckernels = None

CASES = [
    ("rolling_median(w=9)", lambda impl, x: impl.rolling_median(x, 9)),
    ("rolling_median_mad(w=9)", lambda impl, x: impl.rolling_median_mad(x, 9)),
    ("rolling_mean_std(w=17)", lambda impl, x: impl.rolling_mean_std(x, 17)),
    ("trailing_var(w=8)", lambda impl, x: impl.trailing_var(x, 8)),
]


def _series(n, seed=0, missing=0.05):
    rng = np.random.default_rng(seed)
    x = rng.normal(0.0, 1.0, n)
    x[rng.random(n) < missing] = np.nan
    return x


def _time(fn, reps):
    runs = []
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(reps):
            fn()
        runs.append((time.perf_counter() - t0) / reps)
    return float(np.median(runs))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="512,4096,16384")
    parser.add_argument("--reps", type=int, default=30)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _ckernels is None:
        print("compiled backend not built; showing the numpy fallback only")
    header = f"{'kernel':<26} {'n':>7} {'python':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call in CASES:
        for n in sizes:
            x = _series(n)
            call(_pykernels, x)  # warm up
            t_py = _time(lambda: call(_pykernels, x), args.reps)
            if _ckernels is not None:
                call(_ckernels, x)
                t_c = _time(lambda: call(_ckernels, x), args.reps)
                print(
                    f"{name:<26} {n:>7} {t_py * 1e6:>10.1f}us {t_c * 1e6:>10.1f}us "
                    f"{t_py / t_c:>8.1f}x"
                )
            else:
                print(f"{name:<26} {n:>7} {t_py * 1e6:>10.1f}us {'-':>12} {'-':>9}")


if __name__ == "__main__":
    main()
