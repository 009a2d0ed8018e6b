"""Decorrelation and correctness diagnostics for sample sequences.

Autocorrelation estimator: r_k sums (x_t - mean)(x_{t+k} - mean) over the
first T-k terms and divides by the full sum of squared deviations (no bias
correction); r_0 is 1 by convention. A constant sequence has no defined
autocorrelation; those cases return None rather than NaN.

All computations here are pure functions over immutable inputs.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .bosonic import (
    ProblemInstance,
    enumerate_collision_free,
    pattern_rank,
)
from .samplers import SampleRun, make_proposal, as_target

SMALL_INSTANCE_CAP = 3000


# ---------------------------------------------------------------------------
# Sequence statistics
# ---------------------------------------------------------------------------


def autocorrelation(values: Sequence[float], lag: int) -> float | None:
    """Lag-k autocorrelation; None for a degenerate (zero-variance) input."""
    x = np.asarray(values, dtype=float)
    t = x.size
    if not 0 <= lag < t:
        raise ValueError(f"need 0 <= lag < {t}, got {lag}")
    if lag == 0:
        return 1.0
    d = x - x.mean()
    denom = float(d @ d)
    if denom == 0.0:
        return None
    return float(d[: t - lag] @ d[lag:]) / denom


def autocorrelations(values: Sequence[float], max_lag: int) -> list[float | None]:
    """r_k for k = 1..max_lag with the centering and denominator shared."""
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two values")
    max_lag = min(max_lag, x.size - 1)
    d = x - x.mean()
    denom = float(d @ d)
    if denom == 0.0:
        return [None] * max_lag
    return [float(d[: x.size - k] @ d[k:]) / denom for k in range(1, max_lag + 1)]


def durbin_watson(values: Sequence[float]) -> float:
    """d = sum (x_t - x_{t+1})^2 / sum x_t^2; 1 - d/2 estimates r_1."""
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        raise ValueError("need at least two values")
    denom = float(x @ x)
    if denom == 0.0:
        raise ValueError("all-zero sequence")
    diffs = np.diff(x)
    return float(diffs @ diffs) / denom


def similarity(p: Sequence[float], q: Sequence[float]) -> float:
    """S = (sum sqrt(P_i Q_i))^2 / (sum P_i * sum Q_i), in [0, 1]."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"misaligned distributions: {p.shape} vs {q.shape}")
    if (p < 0).any() or (q < 0).any():
        raise ValueError("negative entries")
    sp, sq = p.sum(), q.sum()
    if sp <= 0 or sq <= 0:
        raise ValueError("empty distribution")
    return float(np.sqrt(p * q).sum() ** 2 / (sp * sq))


def frequency_histogram(
    samples: Sequence[Sequence[int]], n: int, m: int, cap: int | None = None
) -> np.ndarray:
    """Empirical frequencies aligned to the canonical pattern order."""
    if not samples:
        raise ValueError("no samples")
    size = math.comb(m, n)
    limit = SMALL_INSTANCE_CAP if cap is None else cap
    if size > limit and cap is None:
        # Histogram arrays are fine well beyond the matrix cap.
        limit = size
    freq = np.zeros(size, dtype=float)
    rank_cache: dict[tuple[int, ...], int] = {}
    for pat in samples:
        key = tuple(pat)
        r = rank_cache.get(key)
        if r is None:
            if len(key) != m or sum(key) != n or any(x not in (0, 1) for x in key):
                raise ValueError(
                    f"pattern {key} is outside the collision-free n={n}, m={m} space"
                )
            r = pattern_rank(key)
            rank_cache[key] = r
        freq[r] += 1.0
    return freq / len(samples)


# ---------------------------------------------------------------------------
# Explicit small-instance chain analysis
# ---------------------------------------------------------------------------


def mh_transition_matrix(target: Sequence[float], proposal: np.ndarray) -> np.ndarray:
    """Metropolis-Hastings transition matrix for an explicit state space.

    Off-diagonal: p_ij = g(s_j|s_i) * min(1, p_j g(s_i|s_j) / (p_i g(s_j|s_i)));
    the diagonal is the row-sum complement. Zero-probability current states
    accept any candidate.
    """
    p = np.asarray(target, dtype=float)
    g = np.asarray(proposal, dtype=float)
    size = p.size
    if g.shape != (size, size):
        raise ValueError("proposal matrix shape does not match the state space")
    mat = np.zeros((size, size), dtype=float)
    for i in range(size):
        row = np.empty(size, dtype=float)
        for j in range(size):
            if i == j or g[i, j] == 0.0:
                row[j] = 0.0
                continue
            if p[i] <= 0.0:
                accept = 1.0
            else:
                accept = min(1.0, (p[j] * g[j, i]) / (p[i] * g[i, j]))
            row[j] = g[i, j] * accept
        row[i] = 0.0
        row[i] = 1.0 - row.sum()
        mat[i] = row
    return mat


def proposal_matrix(inst: ProblemInstance, kind: str,
                    patterns: Sequence[tuple[int, ...]]) -> np.ndarray:
    """Explicit g(s_j|s_i) over the canonical state list."""
    size = len(patterns)
    if kind == "uniform":
        return np.full((size, size), 1.0 / size)
    if kind == "mov1p":
        prop = make_proposal("mov1p", as_target(inst))
        g = np.zeros((size, size))
        for i, a in enumerate(patterns):
            for j, b in enumerate(patterns):
                g[i, j] = prop.g(a, b)
        return g
    if kind == "distinguishable":
        prop = make_proposal("distinguishable", as_target(inst))
        w = np.array([prop.weight(pat) for pat in patterns])
        # Redrawing until collision-free conditions the per-photon draws on
        # the collision-free subset.
        w = w / w.sum()
        return np.tile(w, (size, 1))
    raise ValueError(f"unknown proposal kind {kind!r}")


def transition_matrix(
    inst: ProblemInstance, proposal: str = "uniform", cap: int = SMALL_INSTANCE_CAP
) -> tuple[np.ndarray, list[tuple[int, ...]], np.ndarray]:
    """Explicit chain transition matrix over the collision-free state space.

    Returns (P, patterns, raw target probabilities) in canonical order.
    """
    size = inst.state_space_size()
    if size > cap:
        raise ValueError(f"state space {size} exceeds small-instance cap {cap}")
    patterns = list(enumerate_collision_free(inst.n, inst.m, cap=cap))
    raw = np.array([inst.raw_probability(pat) for pat in patterns])
    g = proposal_matrix(inst, proposal, patterns)
    return mh_transition_matrix(raw, g), patterns, raw


def stationary_distribution(
    p: np.ndarray, tol: float = 1e-14, max_iter: int = 1_000_000
) -> np.ndarray:
    """Stationary row vector of a row-stochastic matrix by power iteration."""
    size = p.shape[0]
    v = np.full(size, 1.0 / size)
    for _ in range(max_iter):
        nxt = v @ p
        if np.abs(nxt - v).max() <= tol:
            return nxt
        v = nxt
    return v


def averaged_tvd(p: np.ndarray, k: int, pi: Sequence[float]) -> float:
    """Mean absolute gap between the k-step transition rows and pi.

    d_A(k) = sum_j ( (1/N) sum_i |p^(k)_ij - pi_j| ).
    """
    if k < 1:
        raise ValueError("need k >= 1")
    pk = np.linalg.matrix_power(p, k)
    return float(np.abs(pk - np.asarray(pi)).sum() / p.shape[0])


def averaged_tvd_curve(p: np.ndarray, pi: Sequence[float], k_max: int) -> np.ndarray:
    """d_A(k) for k = 1..k_max via running matrix powers."""
    pi = np.asarray(pi, dtype=float)
    out = np.empty(k_max)
    pk = p.copy()
    out[0] = np.abs(pk - pi).sum() / p.shape[0]
    for k in range(1, k_max):
        pk = pk @ p
        out[k] = np.abs(pk - pi).sum() / p.shape[0]
    return out


# ---------------------------------------------------------------------------
# Cache distance analytics
# ---------------------------------------------------------------------------


def geometric_distance_pmf(k: int, cache_size: int) -> float:
    """p(k, L) = ((L-1)/L)^(k-1) / L: distance of reordered neighbors."""
    if k < 1:
        raise ValueError("distances start at 1")
    lf = float(cache_size)
    return ((lf - 1.0) / lf) ** (k - 1) / lf


def correlated_pair_probability(cache_size: int, jump: int) -> float:
    """P_cr = 1 - ((L-1)/L)^K: neighbors still within the correlation window."""
    lf = float(cache_size)
    return 1.0 - ((lf - 1.0) / lf) ** jump


@dataclass(frozen=True)
class CacheSizing:
    exact: int
    approx: float


def cache_size_for(jump: int, epsilon: float) -> CacheSizing:
    """Smallest cache with correlated-pair probability at most epsilon.

    ``approx`` carries the first-order K/epsilon rule of thumb.
    """
    if jump < 1:
        raise ValueError("need jump >= 1")
    if not 0 < epsilon <= 1:
        raise ValueError("need 0 < epsilon <= 1")
    approx = jump / epsilon
    lo, hi = 1, max(2, math.ceil(approx) + 2)
    while correlated_pair_probability(hi, jump) > epsilon:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if correlated_pair_probability(mid, jump) <= epsilon:
            hi = mid
        else:
            lo = mid + 1
    return CacheSizing(exact=lo, approx=approx)


@dataclass
class CacheDistanceStats:
    """Distances (in the candidate sequence) between adjacent output samples."""

    histogram: Counter
    pairs: int
    mean_distance: float
    adjacent_count: int      # N_1: pairs at distance exactly 1
    adjacent_ratio: float    # R_1 = N_1 / pairs, estimates 1/L
    window_count: int        # F_K: pairs at distance <= K
    window_ratio: float      # F_K / pairs, the empirical epsilon


def distance_sequence(run: SampleRun) -> np.ndarray:
    if run.source_indices is None:
        raise ValueError("run was produced without candidate retention")
    idx = np.asarray(run.source_indices, dtype=np.int64)
    if idx.size < 2:
        raise ValueError("need at least two output samples")
    return np.abs(np.diff(idx))


def cache_distance_stats(run: SampleRun, jump: int) -> CacheDistanceStats:
    dists = distance_sequence(run)
    pairs = int(dists.size)
    hist = Counter(dists.tolist())
    return CacheDistanceStats(
        histogram=hist,
        pairs=pairs,
        mean_distance=float(dists.mean()),
        adjacent_count=int((dists == 1).sum()),
        adjacent_ratio=float((dists == 1).mean()),
        window_count=int((dists <= jump).sum()),
        window_ratio=float((dists <= jump).mean()),
    )


def distance_goodness_of_fit(
    stats: CacheDistanceStats, cache_size: int, min_expected: float = 5.0
) -> tuple[float, int, float]:
    """Chi-square fit of the observed distances against p(k, L).

    Tail bins with expected count below ``min_expected`` are merged.
    Returns (statistic, degrees of freedom, p-value).
    """
    pairs = stats.pairs
    lf = float(cache_size)
    boundary = 1
    cum = 0.0
    while True:
        exp_k = pairs * geometric_distance_pmf(boundary, cache_size)
        tail = pairs * ((lf - 1.0) / lf) ** boundary
        if exp_k < min_expected or tail < min_expected:
            break
        cum += exp_k
        boundary += 1
    observed = []
    expected = []
    for k in range(1, boundary):
        observed.append(stats.histogram.get(k, 0))
        expected.append(pairs * geometric_distance_pmf(k, cache_size))
    tail_obs = pairs - sum(observed)
    tail_exp = pairs - sum(expected)
    observed.append(tail_obs)
    expected.append(tail_exp)
    obs = np.asarray(observed, dtype=float)
    exp = np.asarray(expected, dtype=float)
    stat = float(((obs - exp) ** 2 / exp).sum())
    dof = len(obs) - 1
    pvalue = float(_scipy_stats.chi2.sf(stat, dof))
    return stat, dof, pvalue


# ---------------------------------------------------------------------------
# Report plumbing
# ---------------------------------------------------------------------------


def write_report_rows(rows, fh) -> None:
    """Flat metric,param,value CSV for external plotting."""
    fh.write("metric,param,value\n")
    for metric, param, value in rows:
        fh.write(f"{metric},{param},{value}\n")
