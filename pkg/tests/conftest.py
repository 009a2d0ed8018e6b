import numpy as np
import pytest

from bosonsamp import bosonic, samplers


@pytest.fixture(scope="session")
def inst_2_4():
    return bosonic.random_instance(2, 4, seed=12)


@pytest.fixture(scope="session")
def table_2_4(inst_2_4):
    return bosonic.full_distribution(inst_2_4)


@pytest.fixture(scope="session")
def inst_5_25():
    return bosonic.random_instance(5, 25, seed=42)


@pytest.fixture(scope="session")
def sc_values_5_25(inst_5_25):
    """sort_order value sequences of 1e5-sample runs on the 5-photon,
    25-mode instance: the plain mov1p chain plus cache-reordered runs over
    a range of cache sizes (shared across test modules, ~15 s to build)."""
    out = {}
    run = samplers.mcmc_sample(inst_5_25, 100_000, seed=101, proposal="mov1p")
    out["plain"] = bosonic.values_for(run.samples, "sort_order")
    for cache_size in (10, 50, 100, 500, 1000, 4000):
        run = samplers.sc_mcmc_sample(
            inst_5_25, cache_size, 100_000, seed=101, proposal="mov1p")
        out[cache_size] = bosonic.values_for(run.samples, "sort_order")
    return out


def drive_cache(cache_size: int, count: int, seed: int) -> samplers.SampleRun:
    """Push a plain index stream through a cache; target-independent."""
    streams = samplers.run_streams(seed)
    cache = samplers.SampleCache(cache_size, streams.cache)
    indices = []
    for i in range(1, count + 1):
        evicted = cache.push(i)
        if evicted is not None:
            indices.append(evicted)
    indices.extend(cache.drain())
    return samplers.SampleRun(
        sampler="cache-stream", n=1, m=2, seed=seed,
        samples=[None] * len(indices), source_indices=indices)


@pytest.fixture(scope="session")
def cache_runs_1m():
    """1e6-candidate cache reorderings for the cache-geometry checks."""
    return {L: drive_cache(L, 1_000_000, seed=9) for L in (10, 100, 200, 1000)}


@pytest.fixture(scope="session")
def uniform_target_2_4():
    probs = {p: 1.0 for p in bosonic.enumerate_collision_free(2, 4)}
    return samplers.MappingTarget(2, 4, probs)


def relerr(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def random_complex(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
