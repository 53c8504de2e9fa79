"""
Entry laws for the data matrix, each standardized analytically to mean 0
and variance 1.

Every DistributionSpec records the analytic Var(X^2), the moment
conditions the law satisfies, and for regularly varying laws the inverse
of the |X| distribution function used to compute a_k.
"""

import functools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import optimize

from src.utils.errors import ConfigError, DomainError
from src.utils.rng import STREAM_DATA, philox_generator

logger = logging.getLogger(__name__)

FAMILIES = ("gaussian", "rademacher", "uniform_scaled", "laplace_scaled", "student_t", "sym_pareto")

_SQRT3 = math.sqrt(3.0)
_LAPLACE_SCALE = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class DistributionSpec:
    family: str
    param: float | None
    moment_class: Tuple[str, ...]
    max_moment: float
    var_x2: float
    tail_index: float | None = None
    abs_tail_inverse: Callable[[float], float] | None = None
    abs_survival: Callable[[float], float] | None = None

    @property
    def label(self) -> str:
        return self.family if self.param is None else f"{self.family}({self.param:g})"

    @property
    def regularly_varying(self) -> bool:
        return any(tag.startswith("RV(") for tag in self.moment_class)

    def has_moment(self, s: float) -> bool:
        return s < self.max_moment

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        return draw(self.family, self.param, rng, shape)


# ----------------------------------------------------------------------
# Samplers (module-level so specs pickle into worker processes)
# ----------------------------------------------------------------------
def draw(family: str, param: float | None, rng: np.random.Generator, shape) -> np.ndarray:
    if family == "gaussian":
        return rng.standard_normal(shape)
    if family == "rademacher":
        return 2.0 * rng.integers(0, 2, size=shape) - 1.0
    if family == "uniform_scaled":
        return rng.uniform(-_SQRT3, _SQRT3, size=shape)
    if family == "laplace_scaled":
        return rng.laplace(0.0, _LAPLACE_SCALE, size=shape)
    if family == "student_t":
        return rng.standard_t(param, size=shape) * math.sqrt((param - 2.0) / param)
    if family == "sym_pareto":
        magnitude = rng.pareto(param, size=shape) + 1.0
        signs = 2.0 * rng.integers(0, 2, size=shape) - 1.0
        return signs * magnitude / _pareto_sigma(param)
    raise ConfigError(f"unknown distribution family {family!r}")


def _pareto_sigma(alpha: float) -> float:
    # second moment of a Pareto(alpha) magnitude on [1, inf)
    return math.sqrt(alpha / (alpha - 2.0))


def pareto_abs_quantile(u: float, alpha: float, scale: float) -> float:
    """Inverse of P(|X| <= x) = 1 - (x / scale)^{-alpha} on [scale, inf)."""
    if not 0.0 <= u < 1.0:
        raise DomainError(f"quantile level must lie in [0, 1), got {u}")
    return scale * (1.0 - u) ** (-1.0 / alpha)


def pareto_abs_survival(x: float, alpha: float, scale: float) -> float:
    return 1.0 if x <= scale else (x / scale) ** (-alpha)


# ----------------------------------------------------------------------
# Factories
# ----------------------------------------------------------------------
def gaussian() -> DistributionSpec:
    return DistributionSpec("gaussian", None, ("C1(inf)", "C3'"), math.inf, 2.0)


def rademacher() -> DistributionSpec:
    return DistributionSpec("rademacher", None, ("C1(inf)", "C3'"), math.inf, 0.0)


def uniform_scaled() -> DistributionSpec:
    return DistributionSpec("uniform_scaled", None, ("C1(inf)", "C3'"), math.inf, 0.8)


def laplace_scaled() -> DistributionSpec:
    # a product of two Laplace variables has a Weibull(1/2) tail: (C2') but not (C3')
    return DistributionSpec("laplace_scaled", None, ("C1(inf)", "C2'"), math.inf, 5.0)


def student_t(nu: float) -> DistributionSpec:
    if not nu > 2:
        raise ConfigError(f"student_t needs nu > 2 for a finite variance, got {nu}")
    var_x2 = (2.0 * nu - 2.0) / (nu - 4.0) if nu > 4 else math.inf
    return DistributionSpec("student_t", float(nu), (f"C1(s<{nu:g})",), float(nu), var_x2)


def sym_pareto(alpha: float) -> DistributionSpec:
    if not alpha > 2:
        raise ConfigError(f"sym_pareto needs alpha > 2 for a finite variance, got {alpha}")
    sigma = _pareto_sigma(alpha)
    if alpha > 4:
        var_x2 = (alpha / (alpha - 4.0)) / (sigma**4) - 1.0
    else:
        var_x2 = math.inf
    scale = 1.0 / sigma
    return DistributionSpec(
        "sym_pareto",
        float(alpha),
        (f"RV({alpha:g})", f"C1(s<{alpha:g})"),
        float(alpha),
        var_x2,
        tail_index=float(alpha),
        abs_tail_inverse=functools.partial(pareto_abs_quantile, alpha=float(alpha), scale=scale),
        abs_survival=functools.partial(pareto_abs_survival, alpha=float(alpha), scale=scale),
    )


def make_distribution(family: str, param: float | None = None) -> DistributionSpec:
    if family == "gaussian":
        return gaussian()
    if family == "rademacher":
        return rademacher()
    if family == "uniform_scaled":
        return uniform_scaled()
    if family == "laplace_scaled":
        return laplace_scaled()
    if family in ("student_t", "sym_pareto"):
        if param is None:
            raise ConfigError(f"{family} needs a parameter")
        return student_t(param) if family == "student_t" else sym_pareto(param)
    raise ConfigError(f"unknown distribution family {family!r}; expected one of {', '.join(FAMILIES)}")


def sample_matrix(spec: DistributionSpec, p: int, n: int, seed) -> np.ndarray:
    """
    p x n matrix of iid standardized entries.

    seed is either a 64-bit integer (bit-identical output for identical
    arguments) or an already derived Generator.
    """
    if p < 1 or n < 1:
        raise DomainError(f"need p, n >= 1, got p={p}, n={n}")
    rng = seed if isinstance(seed, np.random.Generator) else philox_generator(seed, STREAM_DATA)
    return spec.sample(rng, (p, n))


# ----------------------------------------------------------------------
# Tail quantiles
# ----------------------------------------------------------------------
def a_quantile(spec: DistributionSpec, k: int) -> float:
    """
    a_k solving k P(|X| > a_k) = 1.

    Uses the closed-form |X| quantile at level 1 - 1/k when the distribution has
    one; otherwise brackets the survival function and solves with brentq.
    k = 1 returns the level-0 quantile, the lower end of the support of |X|.
    """
    if not spec.regularly_varying:
        raise DomainError(f"{spec.label} has no regularly varying tail; a_k is undefined")
    if k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    if spec.abs_tail_inverse is not None:
        return float(spec.abs_tail_inverse(1.0 - 1.0 / k))
    if spec.abs_survival is None:
        raise DomainError(f"{spec.label} provides neither a tail inverse nor a survival function")

    target = 1.0 / k
    lo, hi = 0.0, 1.0
    while spec.abs_survival(hi) > target:
        lo, hi = hi, hi * 2.0
    return float(optimize.brentq(lambda x: spec.abs_survival(x) - target, lo, hi, rtol=1e-10))


def growth_rate_warnings(spec: DistributionSpec, p: int, n: int) -> list[str]:
    """
    Flag (p, n) outside the growth regime under which the limit theorems
    are established: p = O(n^{(s-2)/4}) under (C1), log p = o(n^{1/3})
    under (C3').
    """
    notes = []
    if math.isfinite(spec.max_moment):
        bound = n ** ((spec.max_moment - 2.0) / 4.0)
        if p > bound:
            notes.append(
                f"{spec.label}: p={p} exceeds n^((s-2)/4)={bound:.3g} for the available moments; limits may not apply"
            )
    elif "C3'" in spec.moment_class and math.log(p) > n ** (1.0 / 3.0):
        notes.append(f"{spec.label}: log p={math.log(p):.3g} exceeds n^(1/3); limits may not apply")
    for note in notes:
        logger.warning(note)
    return notes
