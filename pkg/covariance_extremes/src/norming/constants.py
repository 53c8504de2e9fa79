"""
Normalizing constants for maxima of approximately Gaussian point clouds.

d(count) = sqrt(2 log count) - (log log count + log 4pi) / (2 sqrt(2 log count))

is the centering that makes count * P(Z > d) -> 1. The same formula is
evaluated at the number of points in the cloud: p for row sums and
diagonals, p(p-1)/2 for off-diagonal pairs, binom(p, m) for m-tuples.
"""

import math
from dataclasses import dataclass

import numpy as np

from src.utils.errors import DomainError

_LOG_4PI = np.log(np.longdouble(4) * np.longdouble(np.pi))


def _log_count(count: int) -> np.longdouble:
    if count < 2**63:
        return np.log(np.longdouble(count))
    # binomial counts can exceed every fixed-width integer type
    return np.longdouble(math.log(count))


def d_p(p: int) -> float:
    """
    Normalizing constant at ``p`` points.

    Args:
        p: number of points, at least 2

    Returns:
        d_p, computed in extended precision and rounded to float
    """
    if int(p) != p or p <= 1:
        raise DomainError(f"d_p needs an integer count >= 2, got {p!r}")
    log_p = _log_count(int(p))
    root = np.sqrt(2 * log_p)
    value = root - (np.log(log_p) + _LOG_4PI) / (2 * root)
    return float(value)


def pair_count(p: int) -> int:
    return int(p) * (int(p) - 1) // 2


def tilde_d_p(p: int) -> float:
    """d_p evaluated at the number of off-diagonal pairs p(p-1)/2."""
    if int(p) != p or p < 3:
        raise DomainError(f"tilde_d_p needs p >= 3, got {p!r}")
    return d_p(pair_count(p))


def d_p_m(p: int, m: int) -> float:
    """d_p evaluated at binom(p, m), the number of strictly increasing m-tuples."""
    if int(m) != m or m < 1:
        raise DomainError(f"tensor order must be a positive integer, got {m!r}")
    if int(p) != p or p < 1:
        raise DomainError(f"dimension must be a positive integer, got {p!r}")
    count = math.comb(int(p), int(m))
    if count < 2:
        raise DomainError(f"binom({p}, {m}) = {count} < 2")
    return d_p(count)


@dataclass(frozen=True)
class NormingSchedule:
    """A normalizing constant together with the point count it was evaluated at."""

    p: int
    value: float

    @classmethod
    def for_count(cls, count: int) -> "NormingSchedule":
        return cls(p=int(count), value=d_p(count))

    @classmethod
    def for_pairs(cls, p: int) -> "NormingSchedule":
        return cls(p=pair_count(p), value=tilde_d_p(p))

    @classmethod
    def for_tuples(cls, p: int, m: int) -> "NormingSchedule":
        return cls(p=math.comb(int(p), int(m)), value=d_p_m(p, m))
