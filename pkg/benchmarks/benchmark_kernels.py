#!/usr/bin/env python3
"""Compare the compiled and plain-Python kernel paths.

Times the adaptive integrator march (the dominant inner loop) and the
order-6 cumulative quadrature on the default working grid. Run:

    python3 benchmarks/benchmark_kernels.py [--repeats N]

The compiled column requires numba; when the backend resolves to numpy
(HARDY_FUNDSOL_BACKEND=numpy or numba unavailable) only the plain path runs.
"""

import argparse
import time

import numpy as np

from hardy_fundsol import kernels
from hardy_fundsol.backend import active_backend
from hardy_fundsol.grid import cumulative_integral, default_grid


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    grid = default_grid()
    s = grid.nodes
    N, mu, rho = 3, 3.0 / 16.0, 1.2
    tau = -(N - 2) / 2.0 - np.sqrt((N - 2) ** 2 / 4.0 - mu)
    w0 = np.exp(tau * s[-1])
    v0 = tau * w0

    def march_compiled():
        kernels.march(s, w0, v0, True, N - 2, kernels.KIND_VRHO, mu, rho)

    def march_python():
        kernels.march(s, w0, v0, True, N - 2, kernels.KIND_VRHO, mu, rho,
                      compiled=False)

    g = np.exp(tau * s)

    def quad():
        cumulative_integral(g, grid.h)

    print(f"backend: {active_backend()}   grid: {grid.count} nodes")
    print(f"{'kernel':<34}{'best time':>12}")

    if active_backend() == "numba":
        march_compiled()  # compile outside the timed region
        t = time_call(march_compiled, args.repeats)
        print(f"{'integrator march (numba njit)':<34}{t * 1e3:>9.3f} ms")
    t = time_call(march_python, max(1, args.repeats // 2))
    print(f"{'integrator march (pure python)':<34}{t * 1e3:>9.3f} ms")
    t = time_call(quad, args.repeats)
    print(f"{'cumulative quadrature (numpy)':<34}{t * 1e3:>9.3f} ms")

    wc, _, sc, _ = kernels.march(s, w0, v0, True, N - 2, kernels.KIND_VRHO,
                                 mu, rho)
    wp, _, sp, _ = kernels.march(s, w0, v0, True, N - 2, kernels.KIND_VRHO,
                                 mu, rho, compiled=False)
    print(f"paths agree to {np.max(np.abs(wc / wp - 1.0)):.3e} relative")


if __name__ == "__main__":
    main()
