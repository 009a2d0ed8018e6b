import math
from collections import Counter

import numpy as np
import pytest

from bosonsamp import bosonic, diagnostics as dg, samplers

from conftest import drive_cache


def _reference_autocorrelation(xs, k):
    # direct transcription of the estimator, kept independent of the library
    mean = sum(xs) / len(xs)
    num = sum((xs[t] - mean) * (xs[t + k] - mean) for t in range(len(xs) - k))
    den = sum((x - mean) ** 2 for x in xs)
    return num / den


def test_autocorrelation_alternating():
    xs = [1.0, -1.0] * 500
    r1 = dg.autocorrelation(xs, 1)
    assert abs(r1 - (-1.0)) <= 2 / math.sqrt(len(xs))


def test_autocorrelation_duplicated_pairs():
    rng = np.random.default_rng(14)
    base = rng.standard_normal(50_000)
    xs = np.repeat(base, 2)
    assert abs(dg.autocorrelation(xs, 1) - 0.5) <= 0.02


def test_autocorrelation_iid_null():
    rng = np.random.default_rng(15)
    xs = rng.random(100_000)
    rks = dg.autocorrelations(xs, 200)
    assert max(abs(r) for r in rks) <= 0.02


def test_autocorrelation_iid_three_sigma_bound():
    rng = np.random.default_rng(19)
    xs = rng.random(100_000)
    bound = 3 / math.sqrt(len(xs))
    assert max(abs(r) for r in dg.autocorrelations(xs, 200)) <= bound


def test_autocorrelation_matches_reference():
    rng = np.random.default_rng(17)
    xs = list(rng.standard_normal(500))
    for k in (1, 2, 7, 40):
        assert dg.autocorrelation(xs, k) == pytest.approx(
            _reference_autocorrelation(xs, k), rel=1e-12)


def test_autocorrelation_lag_zero_and_bounds():
    assert dg.autocorrelation([1.0, 2.0, 3.0], 0) == 1.0
    with pytest.raises(ValueError):
        dg.autocorrelation([1.0, 2.0], 2)


def test_autocorrelation_degenerate_marker():
    assert dg.autocorrelation([3.0] * 100, 1) is None
    assert dg.autocorrelations([3.0] * 100, 5) == [None] * 5


def test_durbin_watson_constant():
    assert dg.durbin_watson([2.5] * 50) == 0.0


def test_durbin_watson_alternating():
    xs = [1.0, -1.0] * 500
    assert dg.durbin_watson(xs) == pytest.approx(4.0, rel=2e-3)


def test_durbin_watson_matches_first_order():
    rng = np.random.default_rng(18)
    xs = rng.standard_normal(20_000)
    xs -= xs.mean()
    d = dg.durbin_watson(xs)
    assert abs(d - 2.0) <= 0.05
    assert abs((1 - d / 2) - dg.autocorrelation(xs, 1)) <= 0.05


def test_durbin_watson_all_zero():
    with pytest.raises(ValueError, match="all-zero"):
        dg.durbin_watson([0.0] * 10)


def test_similarity_basic():
    assert dg.similarity([0.2, 0.8], [0.2, 0.8]) == pytest.approx(1.0)
    assert dg.similarity([1.0, 0.0], [0.0, 1.0]) == 0.0
    with pytest.raises(ValueError, match="misaligned"):
        dg.similarity([0.5, 0.5], [1.0])


def test_similarity_scale_invariant():
    p = np.array([0.1, 0.4, 0.5])
    assert dg.similarity(p, 10 * p) == pytest.approx(1.0)


def test_frequency_histogram():
    pats = list(bosonic.enumerate_collision_free(2, 4))
    freq = dg.frequency_histogram([pats[2]] * 5, 2, 4)
    assert freq[2] == 1.0 and freq.sum() == 1.0
    freq = dg.frequency_histogram(pats, 2, 4)
    assert np.allclose(freq, 1 / 6)
    with pytest.raises(ValueError, match="outside"):
        dg.frequency_histogram([(2, 0, 0, 0)], 2, 4)
    with pytest.raises(ValueError, match="no samples"):
        dg.frequency_histogram([], 2, 4)


# ---------------------------------------------------------------------------
# Explicit chain analysis
# ---------------------------------------------------------------------------


def test_two_state_transition_matrix():
    p = dg.mh_transition_matrix([0.75, 0.25], np.full((2, 2), 0.5))
    assert np.allclose(p, [[5 / 6, 1 / 6], [0.5, 0.5]], atol=1e-12)
    pi = np.array([0.75, 0.25])
    assert np.abs(pi @ p - pi).max() <= 1e-12


def test_transition_matrix_rows_sum_to_one(inst_2_4):
    for proposal in ("uniform", "mov1p", "distinguishable"):
        p, pats, raw = dg.transition_matrix(inst_2_4, proposal)
        assert np.abs(p.sum(axis=1) - 1.0).max() <= 1e-12


def test_detailed_balance_symmetric_proposals(inst_2_4):
    for proposal in ("uniform", "mov1p"):
        p, pats, raw = dg.transition_matrix(inst_2_4, proposal)
        pi = raw / raw.sum()
        flows = pi[:, None] * p
        assert np.abs(flows - flows.T).max() <= 1e-12


def test_stationary_matches_exact_distribution(inst_2_4):
    p, pats, raw = dg.transition_matrix(inst_2_4, "uniform")
    pi = raw / raw.sum()
    v = dg.stationary_distribution(p)
    assert np.abs(v - pi).max() <= 1e-10


def test_transition_matrix_cap():
    inst = bosonic.random_instance(3, 9, seed=3)
    with pytest.raises(ValueError, match="cap"):
        dg.transition_matrix(inst, "uniform", cap=10)


def test_averaged_tvd_stationary_is_zero():
    pi = np.array([0.3, 0.7])
    p = np.tile(pi, (2, 1))
    assert dg.averaged_tvd(p, 1, pi) == pytest.approx(0.0, abs=1e-15)
    assert dg.averaged_tvd(p, 5, pi) == pytest.approx(0.0, abs=1e-15)


def test_averaged_tvd_matches_matrix_power(inst_2_4):
    p, pats, raw = dg.transition_matrix(inst_2_4, "uniform")
    pi = raw / raw.sum()
    curve = dg.averaged_tvd_curve(p, pi, 10)
    for k in (1, 4, 10):
        assert curve[k - 1] == pytest.approx(dg.averaged_tvd(p, k, pi), rel=1e-10)


def test_averaged_tvd_monotone_on_seeded_instance():
    inst = bosonic.random_instance(3, 9, seed=3)
    p, pats, raw = dg.transition_matrix(inst, "uniform")
    pi = raw / raw.sum()
    curve = dg.averaged_tvd_curve(p, pi, 60)
    assert np.all(np.diff(curve) <= 1e-12)


# ---------------------------------------------------------------------------
# Cache analytics
# ---------------------------------------------------------------------------


def test_geometric_distance_pmf_normalizes():
    total = sum(dg.geometric_distance_pmf(k, 10) for k in range(1, 2000))
    assert total == pytest.approx(1.0, abs=1e-8)
    mean = sum(k * dg.geometric_distance_pmf(k, 10) for k in range(1, 5000))
    assert mean == pytest.approx(10.0, abs=1e-6)


def test_cache_distance_stats_single_slot():
    run = drive_cache(1, 5000, seed=1)
    stats = dg.cache_distance_stats(run, jump=10)
    assert stats.adjacent_ratio == 1.0
    assert set(stats.histogram) == {1}


def test_cache_distance_stats_requires_indices():
    run = samplers.SampleRun(sampler="x", n=1, m=2, seed=0, samples=[None] * 10)
    with pytest.raises(ValueError, match="retention"):
        dg.cache_distance_stats(run, jump=5)


def test_cache_distance_geometry(cache_runs_1m):
    for cache_size in (10, 100, 1000):
        stats = dg.cache_distance_stats(cache_runs_1m[cache_size], jump=29)
        assert abs(stats.mean_distance - cache_size) / cache_size <= 0.02
        expected = 1.0 / cache_size
        assert abs(stats.adjacent_ratio - expected) / expected <= 0.10


def test_cache_distance_window_ratio(cache_runs_1m):
    stats = dg.cache_distance_stats(cache_runs_1m[200], jump=29)
    assert abs(stats.window_ratio - 0.135) <= 0.015
    theory = dg.correlated_pair_probability(200, 29)
    assert abs(stats.window_ratio - theory) <= 0.005


def test_distance_chi_square_fit(cache_runs_1m):
    for cache_size in (10, 100, 1000):
        stats = dg.cache_distance_stats(cache_runs_1m[cache_size], jump=29)
        _, _, pvalue = dg.distance_goodness_of_fit(stats, cache_size)
        assert pvalue > 0.001


def test_cache_size_for():
    sizing = dg.cache_size_for(200, 0.05)
    assert sizing.approx == pytest.approx(4000.0)
    assert abs(sizing.exact - 4000) / 4000 <= 0.03
    assert dg.correlated_pair_probability(sizing.exact, 200) <= 0.05
    assert dg.correlated_pair_probability(sizing.exact - 1, 200) > 0.05
    assert dg.cache_size_for(1, 0.5).exact == 2
    assert dg.cache_size_for(7, 1.0).exact == 1


# ---------------------------------------------------------------------------
# Decorrelation behaviour of the cache-reordering sampler
# ---------------------------------------------------------------------------


def test_r1_decreases_with_cache_size(sc_values_5_25):
    r1 = {L: dg.autocorrelation(sc_values_5_25[L], 1)
          for L in (10, 50, 100, 500, 1000, 4000)}
    sizes = sorted(r1)
    for small, big in zip(sizes, sizes[1:]):
        assert r1[big] <= r1[small] + 0.01


def test_cache_scatters_low_lag_correlation(sc_values_5_25):
    plain = dg.autocorrelations(sc_values_5_25["plain"], 20)
    cached = dg.autocorrelations(sc_values_5_25[50], 20)
    assert all(c < p for c, p in zip(cached[:5], plain[:5]))


def test_large_cache_flattens_all_lags(sc_values_5_25):
    rks = dg.autocorrelations(sc_values_5_25[4000], 200)
    assert max(abs(r) for r in rks) <= 0.03


def test_similarity_of_long_cached_run():
    inst = bosonic.random_instance(4, 16, seed=8)
    table = bosonic.full_distribution(inst)
    run = samplers.sc_mcmc_sample(inst, 4000, 1_000_000, seed=88)
    freq = dg.frequency_histogram(run.samples, 4, 16, cap=len(table))
    assert dg.similarity(freq, table.normalized) >= 0.99


def test_value_strategy_does_not_change_samples(inst_2_4):
    run = samplers.sc_mcmc_sample(inst_2_4, 50, 2000, seed=77)
    before = list(run.samples)
    bosonic.values_for(run.samples, "sort_order")
    bosonic.values_for(run.samples, "binary_decimal")
    assert run.samples == before


def test_report_rows_csv(tmp_path):
    path = tmp_path / "report.csv"
    with open(path, "w") as fh:
        dg.write_report_rows([("r_k", 1, 0.5), ("similarity", "", 0.99)], fh)
    lines = path.read_text().splitlines()
    assert lines[0] == "metric,param,value"
    assert lines[1] == "r_k,1,0.5"
