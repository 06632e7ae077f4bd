#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-NumPy/Python fallback.

Usage:
    python benchmarks/bench_backends.py [--draws N] [--repeat R]

The batch kernels have two implementations (numba loop, vectorized NumPy)
that can be timed side by side in one process.  The scalar kernels (special
functions, adaptive quadrature) are timed for the active backend only; run
once normally and once with NATBETA_NUMBA=0 to compare those end to end:

    python benchmarks/bench_backends.py
    NATBETA_NUMBA=0 python benchmarks/bench_backends.py
"""

import argparse
import time

import numpy as np

from natbeta import kernels
from natbeta._backend import NUMBA_ENABLED


def best_of(repeat, fn, *args):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_batch_kernels(draws, repeat):
    rng = np.random.Generator(np.random.Philox(key=1))
    betas = np.abs(rng.normal(0.919, 0.018, draws)) + 1e-6
    eps_s = rng.normal(0, 0.05, draws)
    eps_d = rng.normal(0, 0.05, draws)
    out = np.empty((draws, 5))
    out_x = np.empty(draws)
    out_y = np.empty(draws)

    rows = []
    t_numpy = best_of(repeat, kernels._propagate_numpy, betas, 2.113, 2.828, 5.36, 0.029, out)
    if NUMBA_ENABLED:
        kernels._propagate_loop(betas[:64], 2.113, 2.828, 5.36, 0.029, np.empty((64, 5)))
        t_numba = best_of(repeat, kernels._propagate_loop, betas, 2.113, 2.828, 5.36, 0.029, out)
        rows.append(("mc propagate", t_numba, t_numpy))
    else:
        rows.append(("mc propagate", None, t_numpy))

    t_numpy = best_of(repeat, kernels._equilibria_numpy, 0.919, eps_s, eps_d, out_x, out_y)
    if NUMBA_ENABLED:
        kernels._equilibria_loop(0.919, eps_s[:64], eps_d[:64], np.empty(64), np.empty(64))
        t_numba = best_of(repeat, kernels._equilibria_loop, 0.919, eps_s, eps_d, out_x, out_y)
        rows.append(("shocked equilibria", t_numba, t_numpy))
    else:
        rows.append(("shocked equilibria", None, t_numpy))
    return rows


def bench_scalar_kernels(repeat):
    stats = np.linspace(0.05, 6.0, 20_000)

    def t_sweep():
        total = 0.0
        for s in stats:
            total += kernels.student_t_two_sided(s, 16.0)
        return total

    kernels.student_t_two_sided(1.0, 16.0)  # compile if jitted
    kernels.log_beta_weight_integral(10.0, 1e-10)
    return [
        ("t p-values (20k calls)", best_of(repeat, t_sweep)),
        ("zero-sum quadrature 1e6", best_of(repeat, kernels.log_beta_weight_integral, 1e6, 1e-10)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--draws", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    print(f"active backend: {kernels.BACKEND}  "
          f"(NATBETA_NUMBA=0 forces the numpy fallback)\n")

    print(f"{'batch kernel':<24}{'numba (ms)':>12}{'numpy (ms)':>12}{'speedup':>10}")
    for name, t_numba, t_numpy in bench_batch_kernels(args.draws, args.repeat):
        if t_numba is None:
            print(f"{name:<24}{'--':>12}{t_numpy * 1e3:>12.3f}{'--':>10}")
        else:
            print(f"{name:<24}{t_numba * 1e3:>12.3f}{t_numpy * 1e3:>12.3f}"
                  f"{t_numpy / t_numba:>9.1f}x")

    print(f"\n{'scalar kernel':<24}{kernels.BACKEND + ' (ms)':>12}")
    for name, t in bench_scalar_kernels(args.repeat):
        print(f"{name:<24}{t * 1e3:>12.3f}")


if __name__ == "__main__":
    main()
