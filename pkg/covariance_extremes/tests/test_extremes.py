"""
Limit-law samplers, Monte Carlo quantiles, acceptance regions and the
independence tests built on them.
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import math

import numpy as np
import pytest
from scipy import stats

from src.covkernels import OrderStats, gram, offdiag_extremes
from src.extremes import (
    QuantileTable,
    SpacingKind,
    calibrate_region,
    coherence,
    empty_region,
    get_quantile_table,
    jiang_statistic,
    jiang_test,
    limit_spacing_sample,
    region_test,
    sample_limit_vector,
    spacing_limit_quantile,
    spacing_statistic,
    spacing_test,
    top_vector,
    whole_space,
)
from src.norming import gumbel_cdf, jiang_quantile, tilde_d_p
from src.utils.errors import DomainError


def _order_stats(values):
    values = np.asarray(values, dtype=float)
    return OrderStats(k=values.size, values=values, index=np.zeros((values.size, 2), dtype=int))


# ============================================
# coherence statistic and test
# ============================================
def test_jiang_statistic_reference_value():
    assert jiang_statistic(0.12, 1000, 100) == pytest.approx(-2.493501, abs=1e-5)


def test_jiang_statistic_vanishes_at_its_root():
    n, p = 500, 200
    log_p = math.log(p)
    root = math.sqrt((4 * log_p - math.log(log_p)) / n)
    assert jiang_statistic(root, n, p) == pytest.approx(0.0, abs=1e-12)


def test_jiang_statistic_is_monotone_in_coherence():
    grid = np.linspace(0.0, 0.5, 51)
    values = [jiang_statistic(x, 400, 50) for x in grid]
    assert all(b > a for a, b in zip(values[1:], values[2:]))


def test_jiang_statistic_rejects_small_p_and_bad_mode():
    with pytest.raises(DomainError):
        jiang_statistic(0.1, 100, 2)
    with pytest.raises(DomainError):
        jiang_statistic(0.1, 100, 10, mode="spectral")


def test_jiang_test_decisions():
    assert jiang_test(-2.4935, 0.05).reject is False
    assert jiang_test(jiang_quantile(0.05), 0.05).reject is True
    assert jiang_test(-2.4935, 0.05).label == "accept"


def test_jiang_test_rejection_grows_with_alpha():
    for statistic in np.linspace(-5.0, 10.0, 61):
        if jiang_test(statistic, 0.01).reject:
            assert jiang_test(statistic, 0.5).reject


def test_coherence_modes():
    S = np.array([[4.0, -3.0, 1.0], [-3.0, 9.0, 0.5], [1.0, 0.5, 1.0]])
    assert coherence(S, "cov", 10) == pytest.approx(0.3)
    assert coherence(S, "corr", 10) == 3.0
    with pytest.raises(DomainError):
        coherence(S, "other", 10)


def test_jiang_statistic_invariant_under_row_permutation():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((12, 60))
    perm = rng.permutation(12)
    a = jiang_statistic(coherence(gram(X), "cov", 60), 60, 12)
    b = jiang_statistic(coherence(gram(X[perm]), "cov", 60), 60, 12)
    assert a == pytest.approx(b, rel=1e-12)


# ============================================
# spacing statistics
# ============================================
@pytest.mark.parametrize("kind", list(SpacingKind))
def test_spacing_statistic_of_equal_values_is_zero(kind):
    assert spacing_statistic(_order_stats([2.0, 2.0, 2.0, 2.0]), 100, 20, kind) == 0.0


def test_spacing_statistics_coincide_for_two_values():
    top = _order_stats([7.5, 3.25])
    t1 = spacing_statistic(top, 50, 30, SpacingKind.T1)
    assert spacing_statistic(top, 50, 30, SpacingKind.T2) == t1
    assert spacing_statistic(top, 50, 30, SpacingKind.T3) == t1 * t1


def test_spacing_statistics_match_direct_formulas():
    values = np.array([9.0, 6.5, 6.0, 2.0])
    n, p = 64, 40
    d = tilde_d_p(p)
    top = _order_stats(values)
    gaps = d * -np.diff(values) / math.sqrt(n)
    assert spacing_statistic(top, n, p, "T1") == pytest.approx(d * 7.0 / 8.0, rel=1e-14)
    assert spacing_statistic(top, n, p, "T2") == pytest.approx(gaps.max(), rel=1e-14)
    assert spacing_statistic(top, n, p, "T3") == pytest.approx(np.sum(gaps**2), rel=1e-14)


def test_spacing_statistic_is_shift_invariant():
    top = _order_stats([9.0, 6.5, 6.0, 2.0])
    shifted = _order_stats([109.0, 106.5, 106.0, 102.0])
    for kind in SpacingKind:
        assert spacing_statistic(top, 64, 40, kind) == pytest.approx(spacing_statistic(shifted, 64, 40, kind), rel=1e-12)


def test_spacing_statistic_uses_a_prefix():
    top = _order_stats([9.0, 6.5, 6.0, 2.0])
    assert spacing_statistic(top, 64, 40, "T1", k=2) == spacing_statistic(_order_stats([9.0, 6.5]), 64, 40, "T1")


def test_spacing_statistic_rejects_bad_k():
    top = _order_stats([9.0, 6.5, 6.0])
    with pytest.raises(DomainError):
        spacing_statistic(top, 64, 40, "T1", k=4)
    with pytest.raises(DomainError):
        spacing_statistic(top, 64, 40, "T1", k=1)


def test_top_vector_centering():
    p, n = 10, 36
    d = tilde_d_p(p)
    top = _order_stats([6.0 * d, 6.0 * d])
    assert np.allclose(top_vector(top, n, p), 0.0, atol=1e-12)


# ============================================
# limit samplers
# ============================================
def test_limit_vector_rows_strictly_decreasing():
    sample = sample_limit_vector(5, 20000, seed=3)
    assert sample.shape == (20000, 5)
    assert np.all(np.diff(sample, axis=1) < 0)


def test_limit_vector_first_coordinate_is_gumbel():
    sample = sample_limit_vector(1, 400000, seed=4)[:, 0]
    assert sample.mean() == pytest.approx(np.euler_gamma, abs=0.01)
    assert stats.kstest(sample, lambda x: gumbel_cdf(x)).statistic < 0.02


def test_limit_vector_partial_sums_have_unit_rate():
    count = 100000
    gammas = np.exp(-sample_limit_vector(4, count, seed=5))
    for i in range(4):
        assert abs(gammas[:, i].mean() - (i + 1)) <= 4 * math.sqrt((i + 1) / count)


def test_limit_vector_is_reproducible_per_seed_and_stream():
    a = sample_limit_vector(3, 100, seed=9)
    assert np.array_equal(a, sample_limit_vector(3, 100, seed=9))
    assert not np.array_equal(a, sample_limit_vector(3, 100, seed=9, stream=1))
    assert not np.array_equal(a, sample_limit_vector(3, 100, seed=10))


def test_limit_vector_rejects_empty_requests():
    with pytest.raises(DomainError):
        sample_limit_vector(0, 10, seed=1)


def test_spacing_limit_for_two_values_is_standard_exponential():
    sample = limit_spacing_sample("T1", 2, 200000, seed=6)
    assert stats.kstest(sample, "expon").statistic < 0.01


# ============================================
# Monte Carlo quantiles
# ============================================
def test_spacing_quantile_for_two_values():
    q = spacing_limit_quantile("T1", 2, 0.05, 400000, seed=1)
    assert q == pytest.approx(math.log(20.0), abs=0.05)


def test_spacing_quantiles_agree_for_two_values():
    assert spacing_limit_quantile("T1", 2, 0.1, 20000, seed=2) == spacing_limit_quantile("T2", 2, 0.1, 20000, seed=2)


def test_spacing_quantile_grows_with_k():
    values = [spacing_limit_quantile("T1", k, 0.05, 100000, seed=3) for k in (2, 3, 4)]
    assert values[0] < values[1] < values[2]


def test_spacing_quantile_rejects_small_monte_carlo_counts():
    with pytest.raises(DomainError):
        spacing_limit_quantile("T1", 3, 0.05, 9999, seed=1)
    with pytest.raises(DomainError):
        spacing_limit_quantile("T1", 3, 1.0, 10000, seed=1)


def test_spacing_quantile_is_cached():
    table = get_quantile_table()
    first = spacing_limit_quantile("T3", 3, 0.05, 10000, seed=777)
    size = len(table)
    assert spacing_limit_quantile("T3", 3, 0.05, 10000, seed=777) == first
    assert len(table) == size


def test_quantile_table_frame_round_trip():
    table = QuantileTable()
    table.get_or_compute(("T1", 2, 0.05, 10000, 1), lambda: 2.5)
    table.get_or_compute(("T2", 3, 0.1, 10000, 1), lambda: 1.25)
    fresh = QuantileTable()
    fresh.load_frame(table.to_frame())
    assert fresh.to_frame().equals(table.to_frame())
    assert fresh.get_or_compute(("T1", 2, 0.05, 10000, 1), lambda: -1.0) == 2.5


def test_spacing_test_uses_the_monte_carlo_quantile():
    threshold = spacing_limit_quantile("T2", 3, 0.05, 10000, seed=4)
    decision = spacing_test(threshold, "T2", 3, 0.05, 10000, 4)
    assert decision.threshold == threshold
    assert decision.reject is True


def test_spacing_test_on_data():
    rng = np.random.default_rng(12)
    X = rng.standard_normal((15, 80))
    top, _ = offdiag_extremes(gram(X), 4)
    statistic = spacing_statistic(top, 80, 15, "T1")
    assert statistic >= 0.0
    assert spacing_test(statistic, "T1", 4, 0.05, 10000, 0).statistic == statistic


# ============================================
# acceptance regions
# ============================================
def test_whole_space_never_rejects_and_empty_region_always_does():
    rng = np.random.default_rng(1)
    for vector in rng.standard_normal((20, 3)) * 5:
        assert region_test(vector, whole_space, 0.05).reject is False
        assert region_test(vector, empty_region, 0.05).reject is True


def test_region_test_statistic_encoding():
    decision = region_test([0.0, -1.0], empty_region, 0.05)
    assert decision.statistic == 1.0
    assert decision.threshold == 1.0


def test_calibrated_region_coverage():
    region = calibrate_region(2, 0.05, mc_count=20000, seed=0)
    assert abs(region.coverage - 0.95) <= 0.002
    assert np.all(region.lower < region.upper)
    assert region.k == 2


def test_calibrated_region_size_on_fresh_draws():
    region = calibrate_region(2, 0.05, mc_count=20000, seed=0)
    fresh = sample_limit_vector(2, 10000, seed=1)
    rate = 1.0 - region.contains(fresh).mean()
    assert 0.035 <= rate <= 0.065


def test_region_rejects_tiny_calibration():
    with pytest.raises(DomainError):
        calibrate_region(2, 0.05, mc_count=100)
