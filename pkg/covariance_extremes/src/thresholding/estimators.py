"""
Hard-threshold estimators of the covariance and correlation matrices.

    S_hat = S_ij 1(|S_ij| > n t_n),   R_hat = R_ij 1(|R_ij| > t_n),
    t_n = C sqrt(log p / n).

The indicator is strict and applies to every entry, diagonal included.
"""

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from src.covkernels.spectral import operator_norm
from src.utils.errors import DegenerateThresholdWarning, DomainError
from src.utils.validators import check_symmetric

logger = logging.getLogger(__name__)

DEFAULT_C = 2.5


@dataclass(frozen=True)
class ThresholdSpec:
    C: float
    n: int
    p: int

    def __post_init__(self):
        if not self.C > 0:
            raise DomainError(f"threshold constant C must be positive, got {self.C}")
        if self.n < 1 or self.p < 2:
            raise DomainError(f"threshold needs n >= 1 and p >= 2, got n={self.n}, p={self.p}")
        if self.C <= 2:
            logger.info("C=%.3g <= 2; consistency of the thresholded estimates is only established for C > 2", self.C)

    @property
    def t_n(self) -> float:
        return self.C * math.sqrt(math.log(self.p) / self.n)


def _hard_threshold(M: np.ndarray, level: float) -> np.ndarray:
    return np.where(np.abs(M) > level, M, 0.0)


def _check_dims(M: np.ndarray, spec: ThresholdSpec) -> None:
    if M.shape[0] != spec.p:
        raise DomainError(f"matrix has p={M.shape[0]} but threshold spec has p={spec.p}")


def threshold_cov(S, spec: ThresholdSpec) -> np.ndarray:
    S = check_symmetric(S)
    _check_dims(S, spec)
    return _hard_threshold(S, spec.n * spec.t_n)


def threshold_corr(R, spec: ThresholdSpec) -> np.ndarray:
    R = check_symmetric(R)
    _check_dims(R, spec)
    if spec.t_n >= 1.0:
        message = f"t_n={spec.t_n:.4g} >= 1 zeroes every correlation, the unit diagonal included"
        logger.warning(message)
        warnings.warn(message, DegenerateThresholdWarning, stacklevel=2)
    return _hard_threshold(R, spec.t_n)


def consistency_metric(est, kind: str, n: int, p: int) -> float:
    """sqrt(n/p) ||est/n - I|| for kind 'cov', sqrt(n/p) ||est - I|| for kind 'corr'."""
    if p < 1:
        raise DomainError(f"p must be positive, got {p}")
    est = np.asarray(est, dtype=float)
    if kind == "cov":
        deviation = est / n - np.eye(p)
    elif kind == "corr":
        deviation = est - np.eye(p)
    else:
        raise DomainError(f"kind must be 'cov' or 'corr', got {kind!r}")
    return math.sqrt(n / p) * operator_norm(deviation)


def offdiag_support(est) -> np.ndarray:
    """Boolean mask of nonzero strict upper-triangle entries."""
    est = np.asarray(est)
    rows, cols = np.triu_indices(est.shape[0], 1)
    return est[rows, cols] != 0
