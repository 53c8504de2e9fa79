from src.utils.rng import philox_generator, replicate_generator

from .distributions import (
    DistributionSpec,
    a_quantile,
    gaussian,
    growth_rate_warnings,
    laplace_scaled,
    make_distribution,
    rademacher,
    sample_matrix,
    student_t,
    sym_pareto,
    uniform_scaled,
)
from .experiments import AcceptanceCheck, ExperimentConfig, FUNCTIONALS, check_memory, working_set_bytes
from .functionals import (
    run_diag_experiments,
    run_ld_ratio,
    run_max_experiment,
    run_pp_experiment,
    run_random_walk_experiment,
    run_rate_check,
    run_tensor_experiment,
    run_test_size,
)
from .ks import binomial_sigma, ks_statistic, wilson_interval
from .runner import RUNNERS, run_experiment
from .summary import MCSummary, evaluate_checks, write_summary
