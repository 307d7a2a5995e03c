#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure NumPy fallback.

Runs each hot kernel on both backends, checks agreement (bit-exact for the
random path, 1e-9 relative for the spectral sweep), and prints a timing
table.  Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from gridveil._kernels import pure

try:
    from gridveil._kernels import _core
except ImportError:
    _core = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_normals(backend):
    return lambda: backend.normal_block(42, 0, 2_000_000)


def bench_mc(backend):
    mu1 = np.array([1.0, 1.0, 1.0, 1.0])
    mu2 = np.zeros(4)
    sigma = 1.0
    a = (mu1 - mu2) / sigma ** 2
    b = (float(mu2 @ mu2) - float(mu1 @ mu1)) / (2 * sigma ** 2)
    return lambda: backend.mc_success_count(7, mu1, mu2, sigma, a, b, 1_000_000, 0)


def bench_sweep(backend):
    from gridveil import dlc

    loop = dlc.lift_closed_loop(
        dlc.SubsampledPlant(8),
        dlc.PeriodicController([1.0, 0.1, -0.05, 0.02, 0.0, 0.01, -0.02, 0.0]))
    omegas = np.arange(2049) * (2.0 * np.pi / 4096)
    args = dlc._sweep_inputs(loop, omegas)
    return lambda: backend.secular_sweep(*args)


def bench_hinf_calls():
    from gridveil import dlc

    plant = dlc.SubsampledPlant(6)

    def run():
        return dlc.optimal_subsampled_controller(plant, restarts=2, seed=0)

    return run


CASES = [
    ("normal_block (2e6 draws)", bench_normals, "exact"),
    ("mc_success_count (1e6 trials, T=4)", bench_mc, "exact"),
    ("secular_sweep (2049 lanes, N=8)", bench_sweep, "1e-9 rel"),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if _core is None:
        print("compiled backend not built; run `python setup.py build_ext "
              "--inplace` first")
        return

    width = max(len(name) for name, _, _ in CASES)
    print(f"{'kernel':<{width}}  {'pure':>9}  {'compiled':>9}  {'speedup':>8}  agreement")
    for name, make, kind in CASES:
        t_pure, out_pure = timeit(make(pure), args.repeat)
        t_core, out_core = timeit(make(_core), args.repeat)
        if kind == "exact":
            ok = (out_pure == out_core if np.isscalar(out_pure)
                  else bool(np.array_equal(out_pure, out_core)))
        else:
            scale = np.maximum(1.0, np.abs(out_pure))
            ok = bool(np.max(np.abs(out_pure - out_core) / scale) <= 1e-9)
        print(f"{name:<{width}}  {t_pure * 1e3:8.1f}ms  {t_core * 1e3:8.1f}ms  "
              f"{t_pure / t_core:7.1f}x  {'ok' if ok else 'MISMATCH'} ({kind})")

    # end-to-end flavor: one controller optimization through the public API
    t_default, _ = timeit(bench_hinf_calls(), 1)
    print(f"\ncontroller search N=6 (active backend): {t_default:.2f}s")
    print("rerun with GRIDVEIL_PURE=1 to time the same search on the fallback")


if __name__ == "__main__":
    main()
