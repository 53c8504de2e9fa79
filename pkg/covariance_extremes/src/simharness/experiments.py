"""Experiment descriptions and the resource checks run before any allocation."""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Tuple

from src.simharness.distributions import DistributionSpec, make_distribution
from src.utils.errors import ConfigError, ResourceRefusal
from src.utils.rng import check_seed

logger = logging.getLogger(__name__)

FUNCTIONALS = (
    "pp_counts",
    "max_gumbel",
    "joint_max_min",
    "squares",
    "diag_gumbel",
    "diag_frechet",
    "random_walk",
    "corr_variants",
    "ld_ratio",
    "rate_check",
    "test_size",
    "tensor_max",
)

# functionals that only need the p x n data (row sums / row sums of squares)
_VECTOR_FUNCTIONALS = ("random_walk", "ld_ratio", "diag_gumbel")

Window = Tuple[float, float]


@dataclass(frozen=True)
class AcceptanceCheck:
    """A band [lower, upper] on one cell of a summary table, located by equality filters."""

    name: str
    table: str
    column: str
    lower: float | None = None
    upper: float | None = None
    where: Tuple[Tuple[str, Any], ...] = ()


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    functional: str
    family: str
    p: int
    n: int
    replicates: int
    master_seed: int
    param: float | None = None
    windows: Tuple[Window, ...] = ((0.0, math.inf), (1.0, math.inf))
    k: int = 2
    alphas: Tuple[float, ...] = (0.05,)
    C: float = 2.5
    y_grid: Tuple[float, ...] = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
    joint_grid: Tuple[Tuple[float, float], ...] = ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0))
    mc_count: int = 100_000
    mc_seed: int = 0
    limit_draws: int = 10_000
    rate_grid: Tuple[Tuple[int, int], ...] = ()
    tensor_order: int = 3
    checks: Tuple[AcceptanceCheck, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.functional not in FUNCTIONALS:
            raise ConfigError(f"unknown functional {self.functional!r}; expected one of {', '.join(FUNCTIONALS)}")
        if self.replicates < 1:
            raise ConfigError(f"replicates must be >= 1, got {self.replicates}")
        if self.p < 1 or self.n < 1:
            raise ConfigError(f"p and n must be >= 1, got p={self.p}, n={self.n}")
        check_seed(self.master_seed)
        check_seed(self.mc_seed)
        make_distribution(self.family, self.param)
        for a, b in self.windows:
            if a > b:
                raise ConfigError(f"window ({a}, {b}] is reversed")
        for alpha in self.alphas:
            if not 0.0 < alpha < 1.0:
                raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
        if self.functional == "rate_check" and not self.rate_grid:
            raise ConfigError("rate_check needs a non-empty rate_grid of (n, p) pairs")
        if self.functional == "tensor_max" and self.tensor_order < 1:
            raise ConfigError(f"tensor_order must be >= 1, got {self.tensor_order}")

    @property
    def spec(self) -> DistributionSpec:
        return make_distribution(self.family, self.param)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        values = asdict(self)
        values["master_seed"] = check_seed(seed)
        values["checks"] = self.checks
        return ExperimentConfig(**values)

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["windows"] = [[a, b] for a, b in self.windows]
        out["joint_grid"] = [list(cell) for cell in self.joint_grid]
        out["rate_grid"] = [list(cell) for cell in self.rate_grid]
        out["alphas"] = list(self.alphas)
        out["y_grid"] = list(self.y_grid)
        out["checks"] = [
            {**asdict(check), "where": dict(check.where)} for check in self.checks
        ]
        return out


def working_set_bytes(config: ExperimentConfig) -> int:
    """
    Per-worker working set: p^2 doubles when S is formed, p n doubles
    otherwise. The order-m tensor cloud holds C(p, m) values and their
    m-tuple indices on top of the data.
    """
    if config.functional == "tensor_max":
        m = config.tensor_order
        return 8 * (m + 1) * math.comb(config.p, m) + 8 * config.p * config.n
    if config.functional == "rate_check":
        return max(8 * p * p for _, p in config.rate_grid)
    if config.functional in _VECTOR_FUNCTIONALS:
        return 8 * config.p * config.n
    return 8 * config.p * config.p


def check_memory(config: ExperimentConfig, workers: int, cap_mb: float) -> int:
    """Refuse, before allocating anything, when workers x working set exceeds the cap."""
    needed = working_set_bytes(config) * max(1, workers)
    cap = cap_mb * 1024 * 1024
    if needed > cap:
        raise ResourceRefusal(
            f"{config.name}: {workers} worker(s) need {needed / 2**20:.1f} MiB, above the {cap_mb:g} MiB cap"
        )
    logger.debug("%s: memory %.1f MiB within cap %g MiB", config.name, needed / 2**20, cap_mb)
    return needed
