"""Benchmark the compiled simulation kernels against the pure-Python fallback.

Both backends are imported side by side (the package's import-time selection
is bypassed), each workload is timed best-of-N, and the outputs are checked
for bitwise equality before any timing is reported.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from luryecert import _kernels_py
from luryecert.experiments import (
    BENCH_DEADZONE,
    FROMION_FORCING,
    R2_TABLE,
    benchmark_printed_ss,
    fromion_ss,
)
from luryecert.simulation import NonlinearitySpec, SinusoidForcing

try:
    from luryecert import _kernels
except ImportError:
    _kernels = None


def workloads():
    ss = benchmark_printed_ss(0.9)
    code, params = BENCH_DEADZONE.kernel_code()
    r1 = np.zeros(1)
    r2 = np.asarray(R2_TABLE)
    x0 = np.zeros(2)
    yield (
        "discrete_loop (chaotic g=0.9, 1e6 steps)",
        "discrete_loop",
        (ss.A, ss.B, ss.C, x0, r1, r2, code, params, 1_000_000, False),
    )
    dir0 = np.array([1.0, 0.0])
    yield (
        "lyapunov_loop (two trajectories, 1e6 steps)",
        "lyapunov_loop",
        (ss.A, ss.B, ss.C, x0, r2, code, params, 1_000_000, 1000, 1e-8, dir0),
    )
    css = fromion_ss(909.0)
    ccode, cparams = NonlinearitySpec("saturation", limit=1.0).kernel_code()
    yield (
        "rk4_loop (3rd-order plant, 1e5 steps)",
        "rk4_loop",
        (css.A, css.B, css.C, np.zeros(3), 0.0, 1e-3, 100_000,
         SinusoidForcing().params, FROMION_FORCING.params,
         ccode, cparams, 90_000, 1),
    )


def outputs_match(a, b) -> bool:
    for left, right in zip(a, b):
        if isinstance(left, np.ndarray):
            if not np.array_equal(right, left):
                return False
        elif left != right:
            return False
    return len(a) == len(b)


def best_time(fn, args, repeats: int) -> tuple[float, tuple]:
    best = math.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3,
                        help="timings are best-of-N (default 3)")
    opts = parser.parse_args()

    if _kernels is None:
        print("compiled extension not available; timing the fallback only")
    width = 46
    print(f"{'workload':<{width}} {'python':>9} {'cython':>9} {'speedup':>8}")
    for label, name, args in workloads():
        py_t, py_out = best_time(getattr(_kernels_py, name), args, opts.repeats)
        if _kernels is None:
            print(f"{label:<{width}} {py_t:>8.3f}s {'-':>9} {'-':>8}")
            continue
        cy_t, cy_out = best_time(getattr(_kernels, name), args, opts.repeats)
        if not outputs_match(py_out, cy_out):
            print(f"{label:<{width}} OUTPUT MISMATCH between backends")
            return 1
        print(f"{label:<{width}} {py_t:>8.3f}s {cy_t:>8.3f}s {py_t / cy_t:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
