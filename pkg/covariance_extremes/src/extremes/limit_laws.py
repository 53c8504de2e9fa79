"""
Samplers and Monte Carlo quantiles for the limits of the top order
statistics: the vector (-log G_1, ..., -log G_k) with G_i partial sums of
iid standard exponentials, and the spacing functionals built from it.
"""

import enum
import logging
import threading
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np
import pandas as pd

from src.utils.errors import DomainError
from src.utils.rng import philox_generator

logger = logging.getLogger(__name__)

MIN_MC_COUNT = 10_000
COVERAGE_TOLERANCE = 0.002

# fixed stream ids so the samplers never share draws for one seed
_STREAM_LIMIT_VECTOR = 11
_STREAM_SPACING = 12


class SpacingKind(str, enum.Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def sample_limit_vector(k: int, count: int, seed: int, stream: int = 0) -> np.ndarray:
    """
    Draw count iid copies of (-log G_1, ..., -log G_k).

    Distinct stream values give independent samples for the same seed.

    Returns:
        array of shape (count, k); every row strictly decreasing
    """
    if k < 1 or count < 1:
        raise DomainError(f"need k >= 1 and count >= 1, got k={k}, count={count}")
    rng = philox_generator(seed, _STREAM_LIMIT_VECTOR, stream)
    gammas = np.cumsum(rng.standard_exponential((count, k)), axis=1)
    return -np.log(gammas)


def spacing_functional(log_spacings: np.ndarray, kind: SpacingKind) -> np.ndarray:
    """Reduce rows of log-spacings to T1 (sum), T2 (max) or T3 (sum of squares)."""
    kind = SpacingKind(kind)
    if kind is SpacingKind.T1:
        return log_spacings.sum(axis=1)
    if kind is SpacingKind.T2:
        return log_spacings.max(axis=1)
    return np.sum(log_spacings * log_spacings, axis=1)


def limit_spacing_sample(kind: SpacingKind, k: int, count: int, seed: int) -> np.ndarray:
    """
    Draws of the spacing-statistic limit, from the order statistics of k
    iid uniforms: with V_1 >= ... >= V_k, the log-spacings are log(V_i / V_{i+1}).
    """
    if k < 2:
        raise DomainError(f"spacing statistics need k >= 2, got {k}")
    rng = philox_generator(seed, _STREAM_SPACING, k)
    uniforms = np.sort(rng.random((count, k)), axis=1)[:, ::-1]
    log_spacings = np.log(uniforms[:, :-1]) - np.log(uniforms[:, 1:])
    return spacing_functional(log_spacings, kind)


# ----------------------------------------------------------------------
# Quantile cache
# ----------------------------------------------------------------------
QuantileKey = Tuple[str, int, float, int, int]


class QuantileTable:
    """
    Cache of Monte Carlo quantiles keyed by (kind, k, alpha, mc_count, seed).

    Reads are lock-free dict lookups; a miss computes under the lock so
    each entry is written once.
    """

    COLUMNS = ["kind", "k", "alpha", "mc_count", "seed", "value"]

    def __init__(self):
        self._values: Dict[QuantileKey, float] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._values)

    def get_or_compute(self, key: QuantileKey, compute: Callable[[], float]) -> float:
        value = self._values.get(key)
        if value is not None:
            return value
        with self._lock:
            value = self._values.get(key)
            if value is None:
                value = float(compute())
                self._values[key] = value
                logger.debug("quantile table: computed %s = %.6f", key, value)
        return value

    def to_frame(self) -> pd.DataFrame:
        rows = [list(key) + [value] for key, value in sorted(self._values.items())]
        return pd.DataFrame(rows, columns=self.COLUMNS)

    def load_frame(self, frame: pd.DataFrame) -> None:
        with self._lock:
            for row in frame.itertuples(index=False):
                key = (str(row.kind), int(row.k), float(row.alpha), int(row.mc_count), int(row.seed))
                self._values.setdefault(key, float(row.value))


_quantile_table: QuantileTable | None = None
_table_lock = threading.Lock()


def get_quantile_table() -> QuantileTable:
    global _quantile_table
    if _quantile_table is None:
        with _table_lock:
            if _quantile_table is None:
                _quantile_table = QuantileTable()
    return _quantile_table


def spacing_limit_quantile(kind: SpacingKind, k: int, alpha: float, mc_count: int, seed: int) -> float:
    """(1 - alpha)-quantile of the spacing limit law, cached per (kind, k, alpha, mc_count, seed)."""
    _check_alpha(alpha)
    if mc_count < MIN_MC_COUNT:
        raise DomainError(f"mc_count={mc_count} below {MIN_MC_COUNT}; quantile too noisy")
    kind = SpacingKind(kind)
    key = (kind.value, int(k), float(alpha), int(mc_count), int(seed))

    def compute() -> float:
        sample = limit_spacing_sample(kind, k, mc_count, seed)
        return float(np.quantile(sample, 1.0 - alpha))

    return get_quantile_table().get_or_compute(key, compute)


# ----------------------------------------------------------------------
# Acceptance regions for the top-k vector
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class RectangularRegion:
    """Closed axis-aligned box; carries the calibration it came from."""

    lower: np.ndarray
    upper: np.ndarray
    alpha: float
    coverage: float
    mc_count: int
    seed: int

    @property
    def k(self) -> int:
        return int(self.lower.size)

    def contains(self, vectors: np.ndarray) -> np.ndarray:
        vectors = np.atleast_2d(vectors)
        return np.all((vectors >= self.lower) & (vectors <= self.upper), axis=1)

    def __call__(self, vector) -> bool:
        return bool(self.contains(np.asarray(vector, dtype=float))[0])


def _box_coverage(sample: np.ndarray, mid: np.ndarray, half: np.ndarray, scale: float) -> float:
    return float(np.mean(np.all(np.abs(sample - mid) <= scale * half, axis=1)))


def calibrate_region(k: int, alpha: float, mc_count: int = 100_000, seed: int = 0) -> RectangularRegion:
    """
    Default acceptance region for the top-k limit vector.

    Starts from per-coordinate bands at Bonferroni levels alpha/(2k) and
    1 - alpha/(2k), then rescales the box about its centre by bisection to
    the smallest factor whose joint Monte Carlo coverage reaches 1 - alpha.
    """
    _check_alpha(alpha)
    if mc_count < MIN_MC_COUNT:
        raise DomainError(f"mc_count={mc_count} below {MIN_MC_COUNT}")
    sample = sample_limit_vector(k, mc_count, seed)
    tail = alpha / (2.0 * k)
    lo = np.quantile(sample, tail, axis=0)
    hi = np.quantile(sample, 1.0 - tail, axis=0)
    mid = (lo + hi) / 2.0
    half = (hi - lo) / 2.0
    target = 1.0 - alpha

    low_scale, high_scale = 0.0, 1.0
    while _box_coverage(sample, mid, half, high_scale) < target:
        high_scale *= 2.0
    for _ in range(60):
        scale = (low_scale + high_scale) / 2.0
        if _box_coverage(sample, mid, half, scale) >= target:
            high_scale = scale
        else:
            low_scale = scale
    coverage = _box_coverage(sample, mid, half, high_scale)
    if abs(coverage - target) > COVERAGE_TOLERANCE:
        logger.warning("region coverage %.4f misses target %.4f by more than %.3f", coverage, target, COVERAGE_TOLERANCE)
    return RectangularRegion(
        lower=mid - high_scale * half,
        upper=mid + high_scale * half,
        alpha=alpha,
        coverage=coverage,
        mc_count=mc_count,
        seed=seed,
    )
