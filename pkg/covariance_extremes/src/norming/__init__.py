from .constants import NormingSchedule, d_p, d_p_m, pair_count, tilde_d_p
from .laws import (
    GumbelLaw,
    MeanMeasure,
    exp_cdf,
    frechet_cdf,
    gumbel_cdf,
    gumbel_quantile,
    gumbel_sample,
    jiang_cdf,
    jiang_limit_sample,
    jiang_quantile,
    log_std_normal_tail,
    mean_measure,
    mean_measure_frechet,
    std_normal_tail,
    std_normal_tail_array,
)
