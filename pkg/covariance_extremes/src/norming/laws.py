"""
Tail functions and limit laws: normal survival, Gumbel, the
non-standard Gumbel behind the coherence test, Frechet, and the
Poisson mean measures.
"""

import math

import numpy as np
from scipy import special

from src.utils.errors import DomainError

# float64 underflows to zero a little beyond this point
_FLOAT64_TAIL_LIMIT = 37.0
_LOG_8PI = math.log(8 * math.pi)


def std_normal_tail(x: float) -> np.longdouble:
    """
    Standard normal survival function 1 - Phi(x).

    Evaluated through erfc (scipy's ndtr), never as 1 - cdf. Beyond the
    float64 range the value is exponentiated from log_ndtr in extended
    precision, so deep tails such as x = 40 stay representable where the
    platform's long double has a wider exponent than float64.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"std_normal_tail needs a finite argument, got {x}")
    if x < _FLOAT64_TAIL_LIMIT:
        return np.longdouble(special.ndtr(-x))
    return np.exp(np.longdouble(special.log_ndtr(-x)))


def log_std_normal_tail(x):
    """log(1 - Phi(x)), vectorized; finite for every finite x."""
    return special.log_ndtr(-np.asarray(x, dtype=float))


def std_normal_tail_array(x) -> np.ndarray:
    """Vectorized float64 tail for harness use."""
    return special.ndtr(-np.asarray(x, dtype=float))


# ----------------------------------------------------------------------
# Gumbel
# ----------------------------------------------------------------------
def gumbel_cdf(x):
    return np.exp(-np.exp(-np.asarray(x, dtype=float)))


def gumbel_quantile(u: float) -> float:
    if not 0.0 < u < 1.0:
        raise DomainError(f"gumbel_quantile needs u in (0, 1), got {u}")
    return -math.log(-math.log(u))


def gumbel_sample(rng: np.random.Generator, size) -> np.ndarray:
    return rng.gumbel(loc=0.0, scale=1.0, size=size)


class GumbelLaw:
    """Standard Gumbel law Lambda(x) = exp(-e^{-x})."""

    cdf = staticmethod(gumbel_cdf)
    quantile = staticmethod(gumbel_quantile)
    sample = staticmethod(gumbel_sample)


# ----------------------------------------------------------------------
# Coherence-test limit: exp(-e^{-x/2} / sqrt(8 pi))
# ----------------------------------------------------------------------
def jiang_cdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-np.exp(-x / 2.0) / math.sqrt(8 * math.pi))


def jiang_quantile(alpha: float) -> float:
    """(1 - alpha)-quantile: -log(8 pi) - 2 log log(1 / (1 - alpha))."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return -_LOG_8PI - 2.0 * math.log(-math.log1p(-alpha))


def jiang_limit_sample(rng: np.random.Generator, size) -> np.ndarray:
    # if G is standard Gumbel then 2G - log(8 pi) has cdf jiang_cdf
    return 2.0 * rng.gumbel(size=size) - _LOG_8PI


# ----------------------------------------------------------------------
# Frechet and exponential
# ----------------------------------------------------------------------
def frechet_cdf(x, a: float):
    """Phi_a(x) = exp(-x^{-a}) for x > 0, else 0."""
    if a <= 0:
        raise DomainError(f"Frechet index must be positive, got {a}")
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x > 0, np.exp(-np.power(np.where(x > 0, x, 1.0), -a)), 0.0)
    return out


def exp_cdf(x):
    x = np.asarray(x, dtype=float)
    return np.where(x > 0, -np.expm1(-np.maximum(x, 0.0)), 0.0)


# ----------------------------------------------------------------------
# Mean measures of the limiting Poisson processes
# ----------------------------------------------------------------------
def mean_measure(a: float, b: float = math.inf) -> float:
    """mu(a, b] = e^{-a} - e^{-b}, the intensity e^{-x} dx integrated over (a, b]."""
    if a > b:
        raise DomainError(f"window ({a}, {b}] is reversed")
    if b == math.inf:
        return math.exp(-a)
    return math.exp(-a) - math.exp(-b)


def mean_measure_frechet(a: float, b: float, alpha: float) -> float:
    """Mean measure with mu(x, inf) = x^{-alpha/2} on (0, inf)."""
    if a > b:
        raise DomainError(f"window ({a}, {b}] is reversed")
    if a <= 0:
        raise DomainError("Frechet mean measure is only finite on windows with a > 0")
    upper = 0.0 if b == math.inf else b ** (-alpha / 2.0)
    return a ** (-alpha / 2.0) - upper


class MeanMeasure:
    """mu(a, b] = e^{-a} - e^{-b}; with alpha set, the heavy-tail measure mu(x, inf) = x^{-alpha/2}."""

    def __init__(self, alpha: float | None = None):
        self.alpha = alpha

    def __call__(self, a: float, b: float = math.inf) -> float:
        if self.alpha is None:
            return mean_measure(a, b)
        return mean_measure_frechet(a, b, self.alpha)
