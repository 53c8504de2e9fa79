"""
Hard-threshold estimators and the consistency metric.
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import math

import numpy as np
import pytest

from src.covkernels import correlation, gram
from src.thresholding import (
    ThresholdSpec,
    consistency_metric,
    offdiag_support,
    threshold_corr,
    threshold_cov,
)
from src.utils.errors import DegenerateThresholdWarning, DomainError


def _sample_cov(seed, p=10, n=40):
    rng = np.random.default_rng(seed)
    return gram(rng.standard_normal((p, n)))


# ============================================
# ThresholdSpec
# ============================================
def test_threshold_level_formula():
    spec = ThresholdSpec(C=2.5, n=400, p=100)
    assert spec.t_n == pytest.approx(2.5 * math.sqrt(math.log(100) / 400), rel=1e-15)


@pytest.mark.parametrize("C", [0.0, -1.0])
def test_threshold_spec_rejects_nonpositive_constant(C):
    with pytest.raises(DomainError):
        ThresholdSpec(C=C, n=10, p=10)


def test_threshold_spec_rejects_dimension_mismatch():
    with pytest.raises(DomainError):
        threshold_cov(np.eye(3), ThresholdSpec(C=2.5, n=10, p=4))


# ============================================
# covariance thresholding
# ============================================
def test_threshold_cov_keeps_entries_above_level_only():
    S = _sample_cov(1)
    spec = ThresholdSpec(C=0.3, n=40, p=10)
    out = threshold_cov(S, spec)
    level = spec.n * spec.t_n
    expected = np.where(np.abs(S) > level, S, 0.0)
    assert np.array_equal(out, expected)


def test_threshold_cov_zeroes_everything_under_the_level():
    spec = ThresholdSpec(C=2.5, n=40, p=10)
    level = spec.n * spec.t_n
    S = np.full((10, 10), 0.5 * level)
    assert not np.any(threshold_cov(S, spec))


def test_threshold_cov_zeroes_entries_at_the_level():
    spec = ThresholdSpec(C=2.5, n=40, p=2)
    level = spec.n * spec.t_n
    S = np.full((2, 2), level)
    assert not np.any(threshold_cov(S, spec))


def test_threshold_cov_is_idempotent():
    S = _sample_cov(2)
    spec = ThresholdSpec(C=0.5, n=40, p=10)
    once = threshold_cov(S, spec)
    assert np.array_equal(threshold_cov(once, spec), once)


def test_threshold_support_shrinks_with_c():
    S = _sample_cov(3)
    small = offdiag_support(threshold_cov(S, ThresholdSpec(C=0.2, n=40, p=10)))
    large = offdiag_support(threshold_cov(S, ThresholdSpec(C=0.6, n=40, p=10)))
    assert np.all(small[large])


def test_threshold_commutes_with_permutation():
    S = _sample_cov(4)
    spec = ThresholdSpec(C=0.4, n=40, p=10)
    perm = np.random.default_rng(4).permutation(10)
    assert np.array_equal(threshold_cov(S[np.ix_(perm, perm)], spec), threshold_cov(S, spec)[np.ix_(perm, perm)])


# ============================================
# correlation thresholding
# ============================================
def test_threshold_corr_keeps_identity():
    spec = ThresholdSpec(C=2.5, n=1000, p=10)
    assert spec.t_n < 1.0
    assert np.array_equal(threshold_corr(np.eye(10), spec), np.eye(10))


def test_threshold_corr_warns_when_level_reaches_one():
    spec = ThresholdSpec(C=100.0, n=10, p=10)
    R = correlation(_sample_cov(5))
    with pytest.warns(DegenerateThresholdWarning):
        out = threshold_corr(R, spec)
    assert not np.any(out)


# ============================================
# consistency metric
# ============================================
def test_consistency_metric_is_zero_at_truth():
    n, p = 50, 8
    assert consistency_metric(n * np.eye(p), "cov", n, p) == 0.0
    assert consistency_metric(np.eye(p), "corr", n, p) == 0.0


def test_consistency_metric_on_diagonal_perturbation():
    n, p = 200, 6
    delta = np.array([0.01, -0.03, 0.2, 0.05, -0.1, 0.0])
    est = np.eye(p) + np.diag(delta)
    assert consistency_metric(est, "corr", n, p) == pytest.approx(math.sqrt(n / p) * 0.2, rel=1e-6)
    assert consistency_metric(n * est, "cov", n, p) == pytest.approx(math.sqrt(n / p) * 0.2, rel=1e-6)


def test_consistency_metric_on_equicorrelated_estimate():
    n, p = 100, 6
    est = np.eye(p) + 0.3 * (np.ones((p, p)) - np.eye(p))
    assert consistency_metric(est, "corr", n, p) == pytest.approx(math.sqrt(n / p) * 1.5, rel=1e-8)


def test_consistency_metric_rejects_unknown_kind():
    with pytest.raises(DomainError):
        consistency_metric(np.eye(3), "spectral", 10, 3)


def test_thresholded_gaussian_estimate_is_close_to_truth():
    rng = np.random.default_rng(6)
    n, p = 400, 40
    S = gram(rng.standard_normal((p, n)))
    spec = ThresholdSpec(C=2.5, n=n, p=p)
    R_hat = threshold_corr(correlation(S), spec)
    assert not np.any(offdiag_support(R_hat))
    assert consistency_metric(R_hat, "corr", n, p) == 0.0
