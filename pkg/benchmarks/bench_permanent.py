#!/usr/bin/env python3
"""Benchmark the compiled permanent kernels against the pure-Python fallback.

Usage: python benchmarks/bench_permanent.py [--max-dim 20] [--repeats 5]

The two backends compute identical bit patterns (same Gray-code traversal
and accumulation order); this script reports their throughput side by side
and verifies the agreement on every matrix it times.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bosonsamp import _kernels_py

try:
    from bosonsamp import _kernels  # compiled extension

    HAVE_EXT = True
except ImportError:
    _kernels = None
    HAVE_EXT = False


def _time(fn, arg, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(arg)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--max-dim", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"compiled extension available: {HAVE_EXT}")
    print(f"{'dim':>4} {'algorithm':>9} {'compiled (s)':>13} "
          f"{'python (s)':>12} {'speedup':>8}")
    for dim in range(2, args.max_dim + 1):
        a = np.ascontiguousarray(
            rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        )
        for name, c_fn, py_fn in (
            ("glynn", _kernels.glynn if HAVE_EXT else None, _kernels_py.glynn),
            ("ryser", _kernels.ryser if HAVE_EXT else None, _kernels_py.ryser),
        ):
            # the python fallback gets slow beyond ~2^20 terms
            run_py = dim <= 16
            t_py = _time(py_fn, a, args.repeats) if run_py else float("nan")
            if c_fn is not None:
                t_c = _time(c_fn, a, args.repeats)
                if run_py and c_fn(a) != py_fn(a):
                    raise SystemExit(f"backend mismatch at dim {dim} ({name})")
                speedup = t_py / t_c if run_py else float("nan")
                print(f"{dim:>4} {name:>9} {t_c:>13.3e} {t_py:>12.3e} "
                      f"{speedup:>8.1f}")
            else:
                print(f"{dim:>4} {name:>9} {'-':>13} {t_py:>12.3e} {'-':>8}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
