#!/usr/bin/env python3
"""Benchmark the compiled grid-scan kernels against the numpy fallback.

Run from the repository root after building the extension in place:

    python setup.py build_ext --inplace
    python benchmarks/bench_kernels.py
"""

import sys
import time

import numpy as np

sys.path.insert(0, "src")

from multiphon.kernels import _numpy  # noqa: E402

try:
    from multiphon.kernels import _native
except ImportError:
    _native = None


def best_of(fn, repeats=7):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def harmonic_workload():
    rng = np.random.default_rng(0)
    freqs = np.sort(rng.uniform(30.0, 6000.0, 64))
    weights = rng.uniform(1e-4, 1.0, 64)
    # 1-cent grid over [20, 2000] Hz, the default fit search
    grid = 20.0 * 2.0 ** (np.arange(7973) / 1200.0)
    return freqs, weights, grid


def gcd_workload():
    rng = np.random.default_rng(1)
    spacings = np.sort(rng.uniform(40.0, 400.0, 8))
    grid = np.arange(spacings.min() / 8.0, spacings.min() * 1.05, 0.01)
    return spacings, grid


def main():
    rows = []
    freqs, weights, grid = harmonic_workload()
    spacings, g_grid = gcd_workload()

    cases = [
        ("harmonic_deviation_scan (64 partials x 7973 candidates)",
         lambda impl: impl.harmonic_deviation_scan(freqs, weights, grid)),
        (f"gcd_deviation_scan (8 spacings x {len(g_grid)} candidates)",
         lambda impl: impl.gcd_deviation_scan(spacings, g_grid)),
    ]
    for label, call in cases:
        t_py = best_of(lambda: call(_numpy))
        if _native is not None:
            t_c = best_of(lambda: call(_native))
            rows.append((label, t_py, t_c, t_py / t_c))
        else:
            rows.append((label, t_py, None, None))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numpy':>10}  {'native':>10}  {'speedup':>8}")
    for label, t_py, t_c, ratio in rows:
        if t_c is None:
            print(f"{label:<{width}}  {t_py * 1e3:>8.3f}ms  {'n/a':>10}  {'n/a':>8}")
        else:
            print(f"{label:<{width}}  {t_py * 1e3:>8.3f}ms  {t_c * 1e3:>8.3f}ms  "
                  f"{ratio:>7.1f}x")
    if _native is None:
        print("\ncompiled extension not built; run: python setup.py build_ext --inplace")


if __name__ == "__main__":
    main()
