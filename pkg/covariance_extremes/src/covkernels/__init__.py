from .gram import correlation, gram, iter_tensor_entries, tensor_entry, tensor_size
from .order_stats import OrderStats, offdiag_extremes, upper_row_blocks
from .points import (
    NormedPoint,
    PointCloud,
    diagonal_points,
    heavy_tail_diag_points,
    lower_normalized_points,
    normalized_corr_points,
    normalized_offdiag_points,
    squared_points,
    tensor_extremes,
    tensor_points,
)
from .spectral import offdiag_dominance_ratio, operator_norm, start_vectors
