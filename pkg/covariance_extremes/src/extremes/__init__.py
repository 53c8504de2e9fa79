from .decisions import (
    TestDecision,
    coherence,
    decide,
    empty_region,
    jiang_statistic,
    jiang_test,
    region_test,
    spacing_statistic,
    spacing_test,
    top_vector,
    whole_space,
)
from .limit_laws import (
    QuantileTable,
    RectangularRegion,
    SpacingKind,
    calibrate_region,
    get_quantile_table,
    limit_spacing_sample,
    sample_limit_vector,
    spacing_functional,
    spacing_limit_quantile,
)
