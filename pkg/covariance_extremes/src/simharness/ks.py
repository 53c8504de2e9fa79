import math
from typing import Callable, Tuple

import numpy as np
from scipy import stats

from src.utils.errors import DomainError


def ks_statistic(sample, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """
    Two-sided Kolmogorov-Smirnov distance sup|F_m - F|.

    Uses the max over order statistics of i/m - F(x_(i)) and
    F(x_(i)) - (i-1)/m. The sample is sorted if it is not already.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    m = x.size
    if m == 0:
        raise DomainError("KS statistic of an empty sample")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, m + 1)
    d_plus = np.max(i / m - F)
    d_minus = np.max(F - (i - 1) / m)
    return float(max(d_plus, d_minus))


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise DomainError("binomial interval needs at least one trial")
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def binomial_sigma(prob: float, trials: int) -> float:
    return math.sqrt(prob * (1.0 - prob) / trials)
