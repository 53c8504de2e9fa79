"""
Independence tests built on the largest off-diagonal entries.

Two threshold families live here and must not be mixed: the coherence
test compares against the non-standard Gumbel quantile jiang_quantile,
the spacing tests against Monte Carlo quantiles of their own limits.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.covkernels.order_stats import OrderStats
from src.extremes.limit_laws import SpacingKind, spacing_limit_quantile
from src.norming import jiang_quantile, tilde_d_p
from src.utils.errors import DomainError

RegionPredicate = Callable[[np.ndarray], bool]


@dataclass(frozen=True)
class TestDecision:
    """Right-tail decision: reject iff statistic >= threshold."""

    __test__ = False

    statistic: float
    threshold: float
    alpha: float
    reject: bool

    @property
    def label(self) -> str:
        return "reject" if self.reject else "accept"


def decide(statistic: float, threshold: float, alpha: float) -> TestDecision:
    return TestDecision(statistic=float(statistic), threshold=float(threshold), alpha=float(alpha), reject=bool(statistic >= threshold))


def coherence(M, mode: str, n: int) -> float:
    """W_n = max|S_ij| / n for mode 'cov', L_n = max|R_ij| for mode 'corr', over i < j."""
    M = np.asarray(M, dtype=float)
    rows, cols = np.triu_indices(M.shape[0], 1)
    peak = float(np.max(np.abs(M[rows, cols])))
    if mode == "cov":
        return peak / n
    if mode == "corr":
        return peak
    raise DomainError(f"mode must be 'cov' or 'corr', got {mode!r}")


def jiang_statistic(maxabs: float, n: int, p: int, mode: str = "cov") -> float:
    """n * maxabs^2 - 4 log p + log log p."""
    if mode not in ("cov", "corr"):
        raise DomainError(f"mode must be 'cov' or 'corr', got {mode!r}")
    if p < 3:
        raise DomainError(f"coherence statistic needs p >= 3, got p={p}")
    log_p = math.log(p)
    return n * maxabs * maxabs - 4.0 * log_p + math.log(log_p)


def jiang_test(statistic: float, alpha: float) -> TestDecision:
    return decide(statistic, jiang_quantile(alpha), alpha)


def spacing_statistic(top: OrderStats, n: int, p: int, kind: SpacingKind, k: int | None = None) -> float:
    """
    T1 = d~_p (S_(1) - S_(k)) / sqrt(n), T2 = d~_p max spacing / sqrt(n),
    T3 = d~_p^2 / n * sum of squared spacings, from the top-k entries.
    """
    k = top.k if k is None else k
    if k < 2:
        raise DomainError(f"spacing statistics need k >= 2, got {k}")
    if k > top.values.size:
        raise DomainError(f"k={k} exceeds the {top.values.size} available order statistics")
    d = tilde_d_p(p)
    values = np.asarray(top.values[:k], dtype=float)
    scaled = d * (values[:-1] - values[1:]) / math.sqrt(n)
    kind = SpacingKind(kind)
    if kind is SpacingKind.T1:
        return float(d * (values[0] - values[-1]) / math.sqrt(n))
    if kind is SpacingKind.T2:
        return float(scaled.max())
    return float(np.sum(scaled * scaled))


def spacing_test(statistic: float, kind: SpacingKind, k: int, alpha: float, mc_count: int, seed: int) -> TestDecision:
    return decide(statistic, spacing_limit_quantile(kind, k, alpha, mc_count, seed), alpha)


def top_vector(top: OrderStats, n: int, p: int) -> np.ndarray:
    """d~_p (S_(i) / sqrt(n) - d~_p) for the stored top statistics."""
    d = tilde_d_p(p)
    return d * (np.asarray(top.values, dtype=float) / math.sqrt(n) - d)


def region_test(points, region: RegionPredicate, alpha: float) -> TestDecision:
    """
    Reject iff the normalized top-k vector falls outside the acceptance
    region. The statistic is 1.0 outside and 0.0 inside, threshold 1.0.
    """
    outside = 0.0 if region(np.asarray(points, dtype=float)) else 1.0
    return decide(outside, 1.0, alpha)


def whole_space(_vector) -> bool:
    return True


def empty_region(_vector) -> bool:
    return False
