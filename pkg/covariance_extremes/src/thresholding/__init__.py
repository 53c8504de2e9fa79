from .estimators import (
    DEFAULT_C,
    ThresholdSpec,
    consistency_metric,
    offdiag_support,
    threshold_corr,
    threshold_cov,
)
