"""Timing comparison of the compiled and pure-Python chain kernels.

Runs the fourth-order splitting integrator on single-mode states of
increasing size with both backends and prints steps per second and the
speedup.  Usage: python3 benchmarks/bench_stepping.py [--steps N].
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from wavenf.lattice import _kernels_py
from wavenf.lattice import single_mode_state

try:
    from wavenf.lattice import _kernels
except ImportError:
    _kernels = None


def _time_backend(backend, size: int, steps: int) -> float:
    state = single_mode_state(size, 1, alpha=0.25)
    q = np.ascontiguousarray(state.q)
    p = np.ascontiguousarray(state.p)
    backend.run_yoshida4(q, p, 0.1, min(steps, 64), 0.25, 0.0, 0.0, 0)
    best = float("inf")
    for _ in range(3):
        q = np.ascontiguousarray(state.q)
        p = np.ascontiguousarray(state.p)
        start = time.perf_counter()
        backend.run_yoshida4(q, p, 0.1, steps, 0.25, 0.0, 0.0, 0)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=20000)
    args = parser.parse_args()

    if _kernels is None:
        print("compiled backend not available; showing pure Python only")
    print(f"{'size':>6}  {'python steps/s':>15}  {'cython steps/s':>15}  {'speedup':>8}")
    for size in (32, 128, 512, 2048):
        steps = max(500, args.steps // (size // 32))
        t_py = _time_backend(_kernels_py, size, steps)
        rate_py = steps / t_py
        if _kernels is None:
            print(f"{size:>6}  {rate_py:>15.0f}  {'-':>15}  {'-':>8}")
            continue
        t_cy = _time_backend(_kernels, size, steps)
        rate_cy = steps / t_cy
        print(f"{size:>6}  {rate_py:>15.0f}  {rate_cy:>15.0f}  {t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
