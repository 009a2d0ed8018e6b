"""Boson-sampling problem instances and output-pattern bookkeeping.

Patterns are plain tuples of per-mode occupation counts. The canonical
ordering of collision-free patterns is ascending numeric value of the
occupation vector read as an m-bit binary string with mode 0 as the most
significant bit; e.g. for 3 photons in 6 modes the first pattern is
(0,0,0,1,1,1) (value 7) and the last is (1,1,1,0,0,0) (value 56). Ranks in
this order are computed combinatorially, so single patterns can be ranked
and unranked without enumerating the C(m, n) state space.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .permanent import permanent_glynn

Pattern = tuple[int, ...]

DEFAULT_ENUM_CAP = 5_000_000
BINARY_DECIMAL_MODE_LIMIT = 53

VALUE_STRATEGIES = ("binary_decimal", "sort_order", "neg_log_p")


def enum_cap() -> int:
    """Enumeration cap; override with the BOSONSAMP_ENUM_CAP env var."""
    raw = os.environ.get("BOSONSAMP_ENUM_CAP")
    return int(float(raw)) if raw else DEFAULT_ENUM_CAP


def photon_count(pattern: Sequence[int]) -> int:
    return sum(pattern)


def is_collision_free(pattern: Sequence[int]) -> bool:
    return all(x in (0, 1) for x in pattern)


def occupied_modes(pattern: Sequence[int]) -> tuple[int, ...]:
    """Ascending indices of occupied modes (collision-free patterns)."""
    return tuple(j for j, x in enumerate(pattern) if x)


def pattern_from_modes(modes: Sequence[int], m: int) -> Pattern:
    out = [0] * m
    for j in modes:
        out[j] += 1
    return tuple(out)


def standard_input(n: int, m: int) -> Pattern:
    """The |1...1 0...0> input: first n modes occupied."""
    return (1,) * n + (0,) * (m - n)


# ---------------------------------------------------------------------------
# Canonical ranking / enumeration
#
# Reading mode 0 as the most significant bit, the pattern's numeric value is
# sum(2^(m-1-j)) over occupied j. Reflecting indices (j -> m-1-j) turns
# ascending numeric order into colexicographic order of the reflected
# index sets, for which rank/unrank are classical combinadics.
# ---------------------------------------------------------------------------


def pattern_rank(pattern: Sequence[int]) -> int:
    """0-based rank of a collision-free pattern in canonical order."""
    if not is_collision_free(pattern):
        raise ValueError("pattern is not collision-free")
    m = len(pattern)
    refl = sorted(m - 1 - j for j, x in enumerate(pattern) if x)
    return sum(math.comb(c, i + 1) for i, c in enumerate(refl))


def _unrank_colex(r: int, m: int, n: int) -> list[int]:
    # Largest-element-first combinadic unranking of the colex order.
    out = [0] * n
    k = n
    while k > 0:
        lo = k - 1
        hi = m
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if math.comb(mid, k) <= r:
                lo = mid
            else:
                hi = mid - 1
        r -= math.comb(lo, k)
        k -= 1
        out[k] = lo
        m = lo
    return out


def unrank_modes(m: int, n: int, r: int) -> tuple[int, ...]:
    """Occupied-mode indices (ascending) of the rank-r canonical pattern."""
    total = math.comb(m, n)
    if not 0 <= r < total:
        raise ValueError(f"rank {r} outside [0, {total})")
    refl = _unrank_colex(r, m, n)
    return tuple(sorted(m - 1 - c for c in refl))


def unrank_pattern(m: int, n: int, r: int) -> Pattern:
    return pattern_from_modes(unrank_modes(m, n, r), m)


def enumerate_collision_free(
    n: int, m: int, cap: int | None = None
) -> Iterator[Pattern]:
    """All C(m, n) collision-free patterns in canonical order."""
    if not 1 <= n <= m:
        raise ValueError(f"need 1 <= n <= m, got n={n}, m={m}")
    limit = enum_cap() if cap is None else cap
    total = math.comb(m, n)
    if total > limit:
        raise ValueError(
            f"state space C({m},{n}) = {total} exceeds enumeration cap {limit}"
        )

    def rec(largest: int, k: int, chosen: list[int]) -> Iterator[Pattern]:
        if k == 0:
            yield pattern_from_modes([m - 1 - c for c in chosen], m)
            return
        for h in range(k - 1, largest):
            yield from rec(h, k - 1, chosen + [h])

    yield from rec(m, n, [])


def enumerate_all(n: int, m: int, cap: int | None = None) -> Iterator[Pattern]:
    """All C(m+n-1, n) photon distributions over m modes, bunching included."""
    if n < 0 or m < 1:
        raise ValueError(f"need n >= 0 and m >= 1, got n={n}, m={m}")
    limit = enum_cap() if cap is None else cap
    total = math.comb(m + n - 1, n)
    if total > limit:
        raise ValueError(
            f"state space C({m + n - 1},{n}) = {total} exceeds enumeration cap {limit}"
        )

    def rec(mode: int, left: int, prefix: list[int]) -> Iterator[Pattern]:
        if mode == m - 1:
            yield tuple(prefix + [left])
            return
        for c in range(left, -1, -1):
            yield from rec(mode + 1, left - c, prefix + [c])

    yield from rec(0, n, [])


# ---------------------------------------------------------------------------
# Unitaries
# ---------------------------------------------------------------------------


def haar_random_unitary(m: int, seed: int) -> np.ndarray:
    """Haar-distributed m x m unitary, deterministic per seed.

    QR decomposition of a complex standard-Gaussian matrix with the phase
    correction that normalizes R's diagonal to positive reals.
    """
    if m < 1:
        raise ValueError("need m >= 1")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def unitarity_residual(u: np.ndarray) -> float:
    """max |(U U^dagger - I)_jk|."""
    u = np.asarray(u, dtype=np.complex128)
    return float(np.abs(u @ u.conj().T - np.eye(u.shape[0])).max())


def check_unitary(u: np.ndarray, tol: float = 1e-8) -> None:
    res = unitarity_residual(u)
    if res > tol:
        raise ValueError(f"matrix is not unitary: residual {res:.3e} > {tol:.0e}")


def write_unitary(u: np.ndarray, path) -> None:
    """Write the text unitary format: m, then m lines of re/im pairs.

    Values carry 17 significant digits so the file round-trips bit-exactly.
    """
    u = np.asarray(u, dtype=np.complex128)
    m = u.shape[0]
    with open(path, "w") as fh:
        fh.write(f"{m}\n")
        for row in u:
            fields = []
            for z in row:
                fields.append(f"{z.real:.17e}")
                fields.append(f"{z.imag:.17e}")
            fh.write(" ".join(fields) + "\n")


def read_unitary(path, tol: float = 1e-8) -> np.ndarray:
    with open(path) as fh:
        try:
            m = int(fh.readline().split()[0])
        except (IndexError, ValueError):
            raise ValueError(f"{path}: first line must be the mode count") from None
        rows = []
        for i in range(m):
            parts = fh.readline().split()
            if len(parts) != 2 * m:
                raise ValueError(
                    f"{path}: line {i + 2}: expected {2 * m} numbers, got {len(parts)}"
                )
            vals = [float(p) for p in parts]
            rows.append([complex(vals[2 * j], vals[2 * j + 1]) for j in range(m)])
    u = np.array(rows, dtype=np.complex128)
    check_unitary(u, tol)
    return u


# ---------------------------------------------------------------------------
# Instances and probabilities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemInstance:
    """An n-photon, m-mode instance with the standard |1...1 0...0> input."""

    n: int
    m: int
    unitary: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        if not 1 <= self.n <= self.m:
            raise ValueError(f"need 1 <= n <= m, got n={self.n}, m={self.m}")
        u = np.ascontiguousarray(np.asarray(self.unitary, dtype=np.complex128))
        if u.shape != (self.m, self.m):
            raise ValueError(f"unitary shape {u.shape} does not match m={self.m}")
        check_unitary(u)
        object.__setattr__(self, "unitary", u)

    @property
    def input_pattern(self) -> Pattern:
        return standard_input(self.n, self.m)

    @cached_property
    def _input_columns(self) -> np.ndarray:
        return self.unitary[:, : self.n]

    def state_space_size(self) -> int:
        return math.comb(self.m, self.n)

    def raw_probability(self, pattern: Sequence[int]) -> float:
        """|Per(submatrix)|^2 for a collision-free output pattern."""
        rows = [j for j, x in enumerate(pattern) if x]
        per = permanent_glynn(self._input_columns[rows, :])
        return abs(per) ** 2


def random_instance(n: int, m: int, seed: int) -> ProblemInstance:
    return ProblemInstance(n, m, haar_random_unitary(m, seed), seed=seed)


def _expand_by_occupancy(pattern: Sequence[int]) -> list[int]:
    out: list[int] = []
    for j, c in enumerate(pattern):
        if c < 0:
            raise ValueError("negative occupation count")
        out.extend([j] * c)
    return out


def pattern_probability(inst: ProblemInstance, out_pattern: Sequence[int]) -> float:
    """Output probability |Per(U^(S,T))|^2 / (prod s_i! prod t_j!).

    Bunched patterns are allowed (rows/columns repeat per occupancy); for
    collision-free input and output the factorial denominator is 1.
    """
    if len(out_pattern) != inst.m:
        raise ValueError("pattern length does not match mode count")
    if photon_count(out_pattern) != inst.n:
        raise ValueError(
            f"photon count mismatch: {photon_count(out_pattern)} != {inst.n}"
        )
    rows = _expand_by_occupancy(out_pattern)
    cols = _expand_by_occupancy(inst.input_pattern)
    per = permanent_glynn(inst.unitary[np.ix_(rows, cols)])
    denom = 1.0
    for c in inst.input_pattern:
        denom *= math.factorial(c)
    for c in out_pattern:
        denom *= math.factorial(c)
    return abs(per) ** 2 / denom


@dataclass(frozen=True)
class DistributionTable:
    """Collision-free output probabilities in canonical pattern order.

    ``raw`` holds the unnormalized values; ``normalized`` divides by the
    collision-free mass P_CF for sampling within the post-selected regime.
    """

    patterns: tuple[Pattern, ...]
    raw: np.ndarray

    @property
    def collision_free_mass(self) -> float:
        return float(self.raw.sum())

    @cached_property
    def normalized(self) -> np.ndarray:
        mass = self.raw.sum()
        if mass <= 0:
            raise ValueError("distribution has zero collision-free mass")
        return self.raw / mass

    def __len__(self) -> int:
        return len(self.patterns)


def full_distribution(inst: ProblemInstance, cap: int | None = None) -> DistributionTable:
    """Exact probabilities of every collision-free output pattern."""
    patterns = tuple(enumerate_collision_free(inst.n, inst.m, cap=cap))
    raw = np.empty(len(patterns), dtype=float)
    for i, pat in enumerate(patterns):
        raw[i] = inst.raw_probability(pat)
    return DistributionTable(patterns, raw)


# ---------------------------------------------------------------------------
# Value assignment (for autocorrelation statistics)
# ---------------------------------------------------------------------------


def assign_value(
    pattern: Sequence[int],
    strategy: str,
    inst: ProblemInstance | None = None,
) -> float:
    """Scalar value of a pattern under a value-assignment strategy.

    binary_decimal: occupation vector read as a binary integer (mode 0 most
    significant). sort_order: 1-based canonical rank. neg_log_p: -log10 of
    the pattern probability (requires ``inst``).
    """
    if strategy == "binary_decimal":
        m = len(pattern)
        if m > BINARY_DECIMAL_MODE_LIMIT:
            raise ValueError(
                f"word-length limit: binary_decimal needs m <= "
                f"{BINARY_DECIMAL_MODE_LIMIT}, got m = {m}"
            )
        value = 0
        for x in pattern:
            value = (value << 1) | x
        return float(value)
    if strategy == "sort_order":
        return float(pattern_rank(pattern) + 1)
    if strategy == "neg_log_p":
        if inst is None:
            raise ValueError("neg_log_p needs a problem instance for probabilities")
        return -math.log10(pattern_probability(inst, pattern))
    raise ValueError(f"unknown value strategy {strategy!r}")


def values_for(
    patterns: Sequence[Sequence[int]],
    strategy: str,
    inst: ProblemInstance | None = None,
) -> np.ndarray:
    """Vectorized :func:`assign_value`, caching repeated patterns."""
    cache: dict[tuple[int, ...], float] = {}
    out = np.empty(len(patterns), dtype=float)
    for i, pat in enumerate(patterns):
        key = tuple(pat)
        v = cache.get(key)
        if v is None:
            v = assign_value(key, strategy, inst)
            cache[key] = v
        out[i] = v
    return out
