"""Exact permanents of complex (and real) square matrices.

The fast kernels (Glynn and Ryser, both O(n * 2^n) with Gray-code updates)
live in a compiled extension with a pure-Python fallback selected at import
time; set ``BOSONSAMP_BACKEND=python`` or ``=cython`` to force one. The
permutation-sum oracle ``permanent_naive`` is guarded at dimension 12.

Relative rounding error of the fast kernels grows with the 2^n term count;
at the scales handled here (n <= 30) double precision keeps the results
exact to far better than the 1e-10 agreement contract.

All kernels are pure functions and safe to call from multiple threads; the
module-level :data:`counters` instrumentation is plain bookkeeping intended
for single-run cost reporting, not a synchronized structure.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass

import numpy as np

_FORCED = os.environ.get("BOSONSAMP_BACKEND", "").strip().lower()

if _FORCED == "python":
    from . import _kernels_py as _impl

    BACKEND = "python"
elif _FORCED == "cython":
    from . import _kernels as _impl  # type: ignore[no-redef]

    BACKEND = "cython"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl  # type: ignore[no-redef]

        BACKEND = "python"

NAIVE_DIM_LIMIT = 12


@dataclass
class KernelCounters:
    """Running totals of kernel invocations and wall time spent in them."""

    evals: int = 0
    seconds: float = 0.0

    def reset(self) -> None:
        self.evals = 0
        self.seconds = 0.0


counters = KernelCounters()


def _as_square_complex(a) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(a, dtype=np.complex128))
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError("empty matrix")
    return arr


def permanent_glynn(a) -> complex:
    """Permanent via the Glynn formula (2^(n-1) Gray-coded sign vectors)."""
    arr = _as_square_complex(a)
    t0 = time.perf_counter()
    out = _impl.glynn(arr)
    counters.seconds += time.perf_counter() - t0
    counters.evals += 1
    return complex(out)


def permanent_ryser(a) -> complex:
    """Permanent via Ryser inclusion-exclusion (2^n - 1 column subsets)."""
    arr = _as_square_complex(a)
    t0 = time.perf_counter()
    out = _impl.ryser(arr)
    counters.seconds += time.perf_counter() - t0
    counters.evals += 1
    return complex(out)


def permanent_naive(a) -> complex:
    """Permutation-sum oracle; factorial cost, guarded at dimension 12."""
    arr = _as_square_complex(a)
    if arr.shape[0] > NAIVE_DIM_LIMIT:
        raise ValueError(
            f"oracle size exceeded: dim {arr.shape[0]} > {NAIVE_DIM_LIMIT}"
        )
    t0 = time.perf_counter()
    out = _impl.naive(arr)
    counters.seconds += time.perf_counter() - t0
    counters.evals += 1
    return complex(out)


_ALGORITHMS = {
    "glynn": permanent_glynn,
    "ryser": permanent_ryser,
    "naive": permanent_naive,
}


def permanent(a, algorithm: str = "glynn") -> complex:
    try:
        fn = _ALGORITHMS[algorithm]
    except KeyError:
        raise ValueError(f"unknown permanent algorithm {algorithm!r}") from None
    return fn(a)


def permanent_real(a) -> float:
    """Permanent of a real matrix, reusing the complex Glynn kernel."""
    arr = np.asarray(a, dtype=float)
    return permanent_glynn(arr).real


def submatrix(u: np.ndarray, input_pattern, output_pattern) -> np.ndarray:
    """Select the n x n block of ``u`` addressed by two collision-free patterns.

    Columns come from the occupied input modes, rows from the occupied
    output modes, both in ascending mode order.
    """
    m = u.shape[0]
    if len(input_pattern) != m or len(output_pattern) != m:
        raise ValueError("pattern length does not match matrix dimension")
    if any(x not in (0, 1) for x in input_pattern) or any(
        x not in (0, 1) for x in output_pattern
    ):
        raise ValueError("patterns must be collision-free (entries 0 or 1)")
    cols = [j for j, x in enumerate(input_pattern) if x]
    rows = [j for j, x in enumerate(output_pattern) if x]
    if len(cols) != len(rows):
        raise ValueError(
            f"photon count mismatch: input {len(cols)} vs output {len(rows)}"
        )
    return u[np.ix_(rows, cols)]
