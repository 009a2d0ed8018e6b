"""Samplers for boson-sampling distributions.

Five samplers are provided: exact brute-force (inverse CDF over the full
table), rejection sampling with a uniform proposal, the plain
Metropolis-Hastings chain, jump sampling (thinning, keep every K-th
candidate), and the cache-reordering chain sampler in its basic and
improved variants. The cache machinery (:class:`SampleCache`) is
target-independent: it only reorders a candidate stream.

Randomness: every run derives all of its randomness from one 64-bit seed
through ``numpy.random.SeedSequence(seed).spawn(3)``. Child stream 0 feeds
proposal/candidate draws, stream 1 accept/reject decisions, stream 2 cache
slot choices and the final drain order. One accept draw is consumed per
chain step even when the acceptance probability is 1, so the streams
advance identically regardless of the trajectory taken. A candidate is
accepted iff the accept draw u in [0,1) satisfies u < P_accept.

A chain is strictly sequential; independent runs (distinct seeds) may
execute concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .bosonic import (
    DistributionTable,
    Pattern,
    ProblemInstance,
    enum_cap,
    full_distribution,
    occupied_modes,
    pattern_from_modes,
    unrank_pattern,
)
from .permanent import permanent_real

PROPOSAL_KINDS = ("uniform", "mov1p", "distinguishable")

DEFAULT_BURN_IN = 100

# Precompute the unranked pattern list for uniform proposals below this
# state-space size; draws consume the same stream either way.
_UNIFORM_TABLE_LIMIT = 65536

_REDRAW_LIMIT = 1_000_000


@dataclass
class RunStreams:
    """The three per-run random substreams (see module docstring)."""

    proposal: np.random.Generator
    accept: np.random.Generator
    cache: np.random.Generator


def run_streams(seed: int) -> RunStreams:
    children = np.random.SeedSequence(seed).spawn(3)
    return RunStreams(*(np.random.default_rng(c) for c in children))


def _rand_below(rng: np.random.Generator, n: int) -> int:
    """Uniform integer in [0, n) for arbitrarily large python ints."""
    if n < 1:
        raise ValueError("need n >= 1")
    if n <= 1 << 63:
        return int(rng.integers(n))
    k = n.bit_length()
    words = (k + 31) // 32
    while True:
        r = 0
        for w in rng.integers(0, 1 << 32, size=words, dtype=np.uint64):
            r = (r << 32) | int(w)
        r >>= words * 32 - k
        if r < n:
            return r


# ---------------------------------------------------------------------------
# Targets
# ---------------------------------------------------------------------------


class BosonTarget:
    """Raw collision-free output probabilities of a problem instance."""

    def __init__(self, inst: ProblemInstance):
        self.inst = inst
        self.n = inst.n
        self.m = inst.m
        self.input_pattern = inst.input_pattern

    def raw_prob(self, pattern: Pattern) -> float:
        return self.inst.raw_probability(pattern)


class MappingTarget:
    """Dictionary-backed target, handy for tests and cheap cache studies."""

    def __init__(self, n: int, m: int, probs: dict[Pattern, float],
                 input_pattern: Pattern | None = None):
        self.n = n
        self.m = m
        self.probs = probs
        if input_pattern is None:
            input_pattern = (1,) * n + (0,) * (m - n)
        self.input_pattern = input_pattern

    def raw_prob(self, pattern: Pattern) -> float:
        return self.probs.get(pattern, 0.0)


def as_target(inst_or_target):
    if isinstance(inst_or_target, ProblemInstance):
        return BosonTarget(inst_or_target)
    return inst_or_target


# ---------------------------------------------------------------------------
# Proposals
# ---------------------------------------------------------------------------


class UniformProposal:
    """g(s'|s) = 1 / C(m, n): index-uniform over the canonical order."""

    kind = "uniform"
    weighted = False

    def __init__(self, n: int, m: int):
        self.n = n
        self.m = m
        self.size = math.comb(m, n)
        self.density = 1.0 / self.size
        self._table = None
        if self.size <= _UNIFORM_TABLE_LIMIT:
            from .bosonic import enumerate_collision_free

            self._table = list(enumerate_collision_free(n, m, cap=self.size))

    def draw(self, current: Pattern, rng: np.random.Generator) -> Pattern:
        r = _rand_below(rng, self.size)
        if self._table is not None:
            return self._table[r]
        return unrank_pattern(self.m, self.n, r)

    def g(self, frm: Pattern, to: Pattern) -> float:
        return self.density


class Mov1pProposal:
    """Move one photon from a random occupied mode to a random empty one.

    g = 1/(n*(m-n)) on patterns one photon-move apart, 0 otherwise; the
    proposal is symmetric.
    """

    kind = "mov1p"
    weighted = False

    def __init__(self, n: int, m: int):
        if n >= m:
            raise ValueError("mov1p needs at least one empty mode (n < m)")
        self.n = n
        self.m = m
        self.density = 1.0 / (n * (m - n))

    def draw(self, current: Pattern, rng: np.random.Generator) -> Pattern:
        occ = [j for j, x in enumerate(current) if x]
        src = occ[int(rng.integers(self.n))]
        k = int(rng.integers(self.m - self.n))
        seen = -1
        for j, x in enumerate(current):
            if not x:
                seen += 1
                if seen == k:
                    out = list(current)
                    out[src] = 0
                    out[j] = 1
                    return tuple(out)
        raise AssertionError("unreachable: empty-mode scan exhausted")

    def g(self, frm: Pattern, to: Pattern) -> float:
        diff = sum(1 for a, b in zip(frm, to) if a != b)
        return self.density if diff == 2 else 0.0


class DistinguishableProposal:
    """Candidate from the distinguishable-particle distribution.

    Each photon i lands in mode j with probability |u_ji|^2; draws are
    repeated until collision-free. The (unnormalized) density of a pattern
    is the permanent of the squared-modulus submatrix, one real permanent
    per evaluation.
    """

    kind = "distinguishable"
    weighted = True

    def __init__(self, inst: ProblemInstance):
        self.n = inst.n
        self.m = inst.m
        self._probs = np.abs(inst.unitary[:, : inst.n]) ** 2
        self._cdfs = np.cumsum(self._probs, axis=0)
        self._cdfs[-1, :] = 1.0
        self.real_evals = 0

    def draw(self, current: Pattern, rng: np.random.Generator) -> Pattern:
        for _ in range(_REDRAW_LIMIT):
            us = rng.random(self.n)
            modes = [
                int(np.searchsorted(self._cdfs[:, i], us[i], side="right"))
                for i in range(self.n)
            ]
            if len(set(modes)) == self.n:
                return pattern_from_modes(modes, self.m)
        raise RuntimeError("collision-free redraw limit exhausted")

    def weight(self, pattern: Pattern) -> float:
        rows = [j for j, x in enumerate(pattern) if x]
        self.real_evals += 1
        return permanent_real(self._probs[rows, :])

    def g(self, frm: Pattern, to: Pattern) -> float:
        return self.weight(to)


def make_proposal(kind: str, target):
    if kind == "uniform":
        return UniformProposal(target.n, target.m)
    if kind == "mov1p":
        return Mov1pProposal(target.n, target.m)
    if kind == "distinguishable":
        if not isinstance(target, BosonTarget):
            raise ValueError("distinguishable proposal needs a problem instance")
        return DistinguishableProposal(target.inst)
    raise ValueError(f"unknown proposal kind {kind!r}")


def propose(kind: str, current: Pattern, inst: ProblemInstance,
            rng: np.random.Generator):
    """Draw one candidate; returns (candidate, g_forward, g_backward)."""
    prop = make_proposal(kind, as_target(inst))
    cand = prop.draw(current, rng)
    if prop.weighted:
        return cand, prop.weight(cand), prop.weight(current)
    return cand, prop.g(current, cand), prop.g(cand, current)


# ---------------------------------------------------------------------------
# The chain
# ---------------------------------------------------------------------------


@dataclass
class ChainState:
    """Mutable Metropolis-Hastings chain state.

    ``permanent_evals`` counts candidate probability evaluations (one per
    proposal; the initial state's evaluation is setup, not a proposal).
    """

    current: Pattern
    current_prob: float
    step_count: int = 0
    permanent_evals: int = 0
    accepts: int = 0
    current_weight: float | None = None


def mcmc_step(chain: ChainState, proposal, target, streams: RunStreams) -> ChainState:
    """Advance the chain by one step; the new node's pattern is the candidate
    sample (a rejected proposal duplicates the current state).

    Acceptance follows min(1, p(s') g(s|s') / (p(s) g(s'|s))), which for the
    symmetric proposals reduces to min(1, p(s')/p(s)). A zero-probability
    current state accepts with probability 1.
    """
    cand = proposal.draw(chain.current, streams.proposal)
    p_new = target.raw_prob(cand)
    chain.permanent_evals += 1

    if proposal.weighted:
        w_new = proposal.weight(cand)
        w_cur = chain.current_weight
        if w_cur is None:
            w_cur = proposal.weight(chain.current)
        g_ratio = math.inf if w_new <= 0.0 else w_cur / w_new
    else:
        w_new = None
        g_ratio = 1.0

    if chain.current_prob <= 0.0:
        p_accept = 1.0
    else:
        p_accept = min(1.0, (p_new / chain.current_prob) * g_ratio)

    u = float(streams.accept.random())
    chain.step_count += 1
    if u < p_accept:
        chain.current = cand
        chain.current_prob = p_new
        chain.current_weight = w_new
        chain.accepts += 1
    return chain


def _start_chain(target, proposal, streams: RunStreams, burn_in: int) -> ChainState:
    start = target.input_pattern
    chain = ChainState(current=start, current_prob=target.raw_prob(start))
    if proposal.weighted:
        chain.current_weight = proposal.weight(start)
    for _ in range(burn_in):
        mcmc_step(chain, proposal, target, streams)
    return chain


# ---------------------------------------------------------------------------
# Sample cache
# ---------------------------------------------------------------------------


class SampleCache:
    """Fixed-capacity reordering cache.

    Items are held until the cache is full; afterwards every push evicts a
    uniformly random slot to the output and stores the newcomer in its
    place. ``drain`` empties the cache in uniformly random order. Phases:
    CFP while filling, WP once full, CCP during the drain.
    """

    def __init__(self, capacity: int, rng: np.random.Generator):
        if capacity < 1:
            raise ValueError("cache capacity must be >= 1")
        self.capacity = capacity
        self._rng = rng
        self._slots: list = []
        self.phase = "CFP"

    def __len__(self) -> int:
        return len(self._slots)

    @property
    def full(self) -> bool:
        return len(self._slots) >= self.capacity

    def push(self, item):
        """Store ``item``; returns the evicted item once full, else None."""
        if not self.full:
            self._slots.append(item)
            if self.full:
                self.phase = "WP"
            return None
        u = int(self._rng.integers(self.capacity))
        out = self._slots[u]
        self._slots[u] = item
        return out

    def store(self, item) -> None:
        """Store without eviction; only legal while the cache is not full."""
        if self.full:
            raise RuntimeError("cache is full")
        self._slots.append(item)
        if self.full:
            self.phase = "WP"

    def drain(self) -> Iterable:
        """Empty the cache in uniformly random order (without replacement)."""
        self.phase = "CCP"
        while self._slots:
            j = int(self._rng.integers(len(self._slots)))
            out = self._slots[j]
            self._slots[j] = self._slots[-1]
            self._slots.pop()
            yield out

    def discard(self) -> None:
        self.phase = "CCP"
        self._slots.clear()


def cache_fill_point(cache_size: int, jump: int) -> int:
    """Candidate count at which the improved variant's cache becomes full."""
    if cache_size < 1 or jump < 2:
        raise ValueError("need cache_size >= 1 and jump >= 2")
    return -(-cache_size // (jump - 1)) + cache_size


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------


@dataclass
class SampleRun:
    """An ordered sample sequence plus run bookkeeping."""

    sampler: str
    n: int
    m: int
    seed: int
    samples: list[Pattern] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    permanent_evals: int = 0
    real_permanent_evals: int = 0
    acceptance_count: int = 0
    candidate_count: int = 0
    trials: int = 0
    cfp_end: int | None = None
    candidates: list[Pattern] | None = None
    source_indices: list[int] | None = None


def brute_force_sample(table: DistributionTable, count: int, seed: int) -> SampleRun:
    """i.i.d. draws by inverse CDF over the canonical pattern order."""
    if len(table) == 0:
        raise ValueError("empty distribution table")
    probs = table.normalized
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError("table is not normalized")
    streams = run_streams(seed)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    us = streams.proposal.random(count)
    idx = np.searchsorted(cdf, us, side="right")
    pat0 = table.patterns[0]
    run = SampleRun(
        sampler="brute",
        n=sum(pat0),
        m=len(pat0),
        seed=seed,
        params={"count": count},
    )
    run.samples = [table.patterns[i] for i in idx]
    run.candidate_count = count
    return run


def rejection_sample(
    inst: ProblemInstance | None,
    count: int,
    seed: int,
    lam: float | None = None,
    table: DistributionTable | None = None,
    cap: int | None = None,
) -> SampleRun:
    """Rejection sampling with the uniform proposal g = 1/C(m, n).

    When the state space fits under the enumeration cap the full table is
    computed, candidates are validated exactly, and the default lambda is
    the tight C(m, n) * max f. Otherwise lambda must be supplied; target
    values are then raw probabilities, monitored for f(x) > lambda * g(x).
    """
    if table is None:
        if inst is None:
            raise ValueError("need an instance or a distribution table")
        size = inst.state_space_size()
        if size <= (cap if cap is not None else enum_cap()):
            table = full_distribution(inst, cap=cap)

    if table is not None:
        pat0 = table.patterns[0]
        n, m = sum(pat0), len(pat0)
        size = len(table)
        f = table.normalized
        if lam is None:
            lam = size * float(f.max())
    else:
        n, m = inst.n, inst.m
        size = inst.state_space_size()
        f = None
        if lam is None:
            raise ValueError(
                "state space exceeds the enumeration cap; lambda is required"
            )

    g = 1.0 / size
    streams = run_streams(seed)
    run = SampleRun(
        sampler="rejection", n=n, m=m, seed=seed,
        params={"count": count, "lambda": lam},
    )
    samples = run.samples
    trials = 0
    while len(samples) < count:
        trials += 1
        r = _rand_below(streams.proposal, size)
        if f is not None:
            fx = float(f[r])
            pat = None
        else:
            pat = unrank_pattern(m, n, r)
            fx = inst.raw_probability(pat)
            run.permanent_evals += 1
        p_accept = fx / (lam * g)
        if p_accept > 1.0 + 1e-12:
            raise ValueError(
                f"lambda too small: f(x) = {fx:.3e} exceeds lambda*g(x) = "
                f"{lam * g:.3e}"
            )
        if float(streams.accept.random()) < p_accept:
            samples.append(table.patterns[r] if pat is None else pat)
    run.trials = trials
    run.candidate_count = trials
    run.acceptance_count = count
    return run


def _chain_run(
    inst_or_target,
    sampler: str,
    count: int,
    seed: int,
    proposal_kind: str,
    burn_in: int,
    params: dict,
):
    target = as_target(inst_or_target)
    streams = run_streams(seed)
    proposal = make_proposal(proposal_kind, target)
    chain = _start_chain(target, proposal, streams, burn_in)
    run = SampleRun(
        sampler=sampler,
        n=target.n,
        m=target.m,
        seed=seed,
        params={"proposal": proposal_kind, "burn_in": burn_in, "count": count,
                **params},
    )
    pool: dict[Pattern, Pattern] = {}
    return run, target, chain, proposal, streams, pool


def _finish_chain_run(run: SampleRun, chain: ChainState, proposal) -> SampleRun:
    run.permanent_evals = chain.permanent_evals
    run.acceptance_count = chain.accepts
    if getattr(proposal, "weighted", False):
        run.real_permanent_evals = proposal.real_evals
    return run


def mcmc_sample(
    inst_or_target,
    count: int,
    seed: int,
    proposal: str = "uniform",
    burn_in: int = DEFAULT_BURN_IN,
) -> SampleRun:
    """Plain chain: every post-burn-in candidate is emitted."""
    run, target, chain, prop, streams, pool = _chain_run(
        inst_or_target, "mcmc", count, seed, proposal, burn_in, {})
    samples = run.samples
    for _ in range(count):
        mcmc_step(chain, prop, target, streams)
        samples.append(pool.setdefault(chain.current, chain.current))
    run.candidate_count = count
    return _finish_chain_run(run, chain, prop)


def mis_sample(
    inst_or_target,
    jump: int,
    count: int,
    seed: int,
    proposal: str = "uniform",
    burn_in: int = DEFAULT_BURN_IN,
) -> SampleRun:
    """Jump sampling: keep candidates 1, K+1, 2K+1, ... and discard the rest."""
    if jump < 1:
        raise ValueError("jump step must be >= 1")
    run, target, chain, prop, streams, pool = _chain_run(
        inst_or_target, "mis", count, seed, proposal, burn_in, {"K": jump})
    samples = run.samples
    i = 0
    while len(samples) < count:
        i += 1
        mcmc_step(chain, prop, target, streams)
        if (i - 1) % jump == 0:
            samples.append(pool.setdefault(chain.current, chain.current))
    run.candidate_count = i
    return _finish_chain_run(run, chain, prop)


def sc_mcmc_sample(
    inst_or_target,
    cache_size: int,
    count: int,
    seed: int,
    proposal: str = "uniform",
    burn_in: int = DEFAULT_BURN_IN,
    retain_candidates: bool = False,
    discard_cache: bool = False,
) -> SampleRun:
    """Cache-reordering chain sampler, basic variant.

    Candidates fill the cache until it is full; afterwards each candidate
    evicts a uniformly random cached sample to the output. After ``count``
    candidates the cache is drained in random order, so the output is a
    permutation of the candidate sequence (unless ``discard_cache``).
    """
    run, target, chain, prop, streams, pool = _chain_run(
        inst_or_target, "scmcmc", count, seed, proposal, burn_in,
        {"L": cache_size})
    cache = SampleCache(cache_size, streams.cache)
    samples = run.samples
    src: list[int] | None = [] if retain_candidates else None
    if retain_candidates:
        run.candidates = []
        run.source_indices = src

    def emit(item):
        samples.append(item[1])
        if src is not None:
            src.append(item[0])

    for i in range(1, count + 1):
        mcmc_step(chain, prop, target, streams)
        pat = pool.setdefault(chain.current, chain.current)
        if retain_candidates:
            run.candidates.append(pat)
        out = cache.push((i, pat))
        if out is not None:
            emit(out)
    if discard_cache:
        cache.discard()
    else:
        for out in cache.drain():
            emit(out)
    run.candidate_count = count
    return _finish_chain_run(run, chain, prop)


def improved_sc_mcmc_sample(
    inst_or_target,
    cache_size: int,
    jump: int,
    count: int,
    seed: int,
    proposal: str = "uniform",
    burn_in: int = DEFAULT_BURN_IN,
    retain_candidates: bool = False,
    discard_cache: bool = False,
) -> SampleRun:
    """Cache-reordering chain sampler with jump-sampled cache filling.

    While the cache fills, candidates 1, K+1, 2K+1, ... are output directly
    (the first has nothing to correlate with) and the rest are cached; the
    cache becomes full after exactly ceil(L/(K-1)) + L candidates. From then
    on it behaves like the basic variant. If the run ends before the cache
    fills, the output is the jump-sampled sequence plus the drained cache.
    """
    if jump < 2:
        raise ValueError("improved variant needs jump >= 2")
    run, target, chain, prop, streams, pool = _chain_run(
        inst_or_target, "scmcmc-improved", count, seed, proposal, burn_in,
        {"L": cache_size, "K": jump})
    cache = SampleCache(cache_size, streams.cache)
    expected_fill = cache_fill_point(cache_size, jump)
    samples = run.samples
    src: list[int] | None = [] if retain_candidates else None
    if retain_candidates:
        run.candidates = []
        run.source_indices = src

    def emit(item):
        samples.append(item[1])
        if src is not None:
            src.append(item[0])

    for i in range(1, count + 1):
        mcmc_step(chain, prop, target, streams)
        pat = pool.setdefault(chain.current, chain.current)
        if retain_candidates:
            run.candidates.append(pat)
        if not cache.full:
            if (i - 1) % jump == 0:
                emit((i, pat))
            else:
                cache.store((i, pat))
                if cache.full:
                    run.cfp_end = i
                    if i != expected_fill:
                        raise AssertionError(
                            f"cache filled at candidate {i}, expected "
                            f"{expected_fill}"
                        )
        else:
            emit(cache.push((i, pat)))
    if discard_cache:
        cache.discard()
    else:
        for out in cache.drain():
            emit(out)
    run.candidate_count = count
    return _finish_chain_run(run, chain, prop)


# ---------------------------------------------------------------------------
# Sample files
# ---------------------------------------------------------------------------


def format_pattern(pattern: Pattern) -> str:
    return ",".join(str(j) for j in occupied_modes(pattern))


def write_sample_run(
    run: SampleRun,
    path,
    candidates_path=None,
    indices_path=None,
) -> None:
    """Write one sample per line (ascending occupied-mode indices), with
    ``# key=value`` metadata header lines. Optionally writes the retained
    candidate sequence and the per-output candidate indices alongside."""
    header = {
        "sampler": run.sampler,
        "n": run.n,
        "m": run.m,
        "seed": run.seed,
    }
    for key in ("proposal", "burn_in", "count", "L", "K", "lambda"):
        if key in run.params:
            header[key] = run.params[key]
    header["permanent_evals"] = run.permanent_evals
    header["acceptance_count"] = run.acceptance_count
    header["candidate_count"] = run.candidate_count
    if run.trials:
        header["trials"] = run.trials
    if run.cfp_end is not None:
        header["cfp_end"] = run.cfp_end
    if candidates_path is not None:
        header["candidates_file"] = str(candidates_path)
    if indices_path is not None:
        header["indices_file"] = str(indices_path)

    with open(path, "w") as fh:
        for key, value in header.items():
            fh.write(f"# {key}={value}\n")
        for pat in run.samples:
            fh.write(format_pattern(pat) + "\n")

    if candidates_path is not None:
        if run.candidates is None:
            raise ValueError("run has no retained candidates")
        with open(candidates_path, "w") as fh:
            fh.write(f"# sampler={run.sampler}\n# n={run.n}\n# m={run.m}\n")
            for pat in run.candidates:
                fh.write(format_pattern(pat) + "\n")
    if indices_path is not None:
        if run.source_indices is None:
            raise ValueError("run has no source indices")
        with open(indices_path, "w") as fh:
            for idx in run.source_indices:
                fh.write(f"{idx}\n")


def load_samples(path) -> tuple[dict, list[Pattern]]:
    """Parse a samples file; returns (header dict, occupation patterns)."""
    header: dict[str, str] = {}
    patterns: list[Pattern] = []
    pool: dict[tuple[int, ...], Pattern] = {}
    m = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    header[key.strip()] = value.strip()
                continue
            if m is None:
                if "m" not in header:
                    raise ValueError(f"{path}:{lineno}: no '# m=' header before data")
                m = int(header["m"])
            try:
                modes = tuple(int(tok) for tok in line.split(","))
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: malformed sample line {line!r}"
                ) from None
            if any(not 0 <= j < m for j in modes) or len(set(modes)) != len(modes):
                raise ValueError(f"{path}:{lineno}: invalid mode indices {line!r}")
            pat = pool.get(modes)
            if pat is None:
                pat = pattern_from_modes(modes, m)
                pool[modes] = pat
            patterns.append(pat)
    return header, patterns


def load_indices(path) -> list[int]:
    with open(path) as fh:
        return [int(line) for line in fh if line.strip() and not line.startswith("#")]
