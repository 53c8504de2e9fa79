import logging
import time
from typing import Callable, Dict

from src import __version__
from src.simharness.experiments import ExperimentConfig, check_memory
from src.simharness.functionals import (
    run_diag_experiments,
    run_ld_ratio,
    run_max_experiment,
    run_pp_experiment,
    run_random_walk_experiment,
    run_rate_check,
    run_tensor_experiment,
    run_test_size,
)
from src.simharness.summary import MCSummary
from src.utils.errors import ConfigError

logger = logging.getLogger(__name__)

RUNNERS: Dict[str, Callable[..., MCSummary]] = {
    "pp_counts": run_pp_experiment,
    "squares": run_pp_experiment,
    "corr_variants": run_pp_experiment,
    "max_gumbel": run_max_experiment,
    "joint_max_min": run_max_experiment,
    "random_walk": run_random_walk_experiment,
    "diag_gumbel": run_diag_experiments,
    "diag_frechet": run_diag_experiments,
    "ld_ratio": run_ld_ratio,
    "test_size": run_test_size,
    "rate_check": run_rate_check,
    "tensor_max": run_tensor_experiment,
}


def provenance(config: ExperimentConfig) -> dict:
    spec = config.spec
    return {
        "tool_version": __version__,
        "experiment": config.name,
        "functional": config.functional,
        "distribution": spec.label,
        "moment_class": list(spec.moment_class),
        "var_x2": spec.var_x2,
        "master_seed": config.master_seed,
        "replicates": config.replicates,
        "p": config.p,
        "n": config.n,
    }


def run_experiment(
    config: ExperimentConfig,
    workers: int = 1,
    memory_cap_mb: float | None = None,
    mp_start: str = "spawn",
    progress: bool = False,
) -> MCSummary:
    """Check resources, run the configured functional and attach provenance."""
    runner = RUNNERS.get(config.functional)
    if runner is None:
        raise ConfigError(f"unknown functional {config.functional!r}")
    if memory_cap_mb is not None:
        check_memory(config, workers, memory_cap_mb)

    logger.info("running %s (%s, %s, p=%d, n=%d, %d replicates)", config.name, config.functional, config.spec.label, config.p, config.n, config.replicates)
    started = time.perf_counter()
    summary = runner(config, workers=workers, mp_start=mp_start, progress=progress)
    summary.runtime_seconds = time.perf_counter() - started
    summary.provenance = provenance(config)
    logger.info("%s finished in %.1fs; checks %s", config.name, summary.runtime_seconds, "passed" if summary.passed else "FAILED")
    return summary
