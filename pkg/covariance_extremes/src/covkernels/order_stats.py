from dataclasses import dataclass
from typing import Iterator, List, Tuple

import numpy as np
import pandas as pd

from src.utils.errors import DomainError
from src.utils.validators import check_symmetric


@dataclass(frozen=True)
class OrderStats:
    """
    k extreme off-diagonal entries with their (i, j) positions, 0-based.

    Top statistics are stored largest first, bottom statistics smallest
    first. Equal values are ordered by the lexicographically smallest pair.
    """

    k: int
    values: np.ndarray
    index: np.ndarray

    @property
    def descending(self) -> List[Tuple[float, Tuple[int, int]]]:
        return [(float(v), (int(i), int(j))) for v, (i, j) in zip(self.values, self.index)]

    def to_frame(self, side: str) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "side": side,
                "rank": np.arange(1, self.k + 1),
                "i": self.index[:, 0] + 1,
                "j": self.index[:, 1] + 1,
                "value": self.values,
            }
        )


# rows of the upper triangle are gathered until a block holds this many entries
ROW_BLOCK_ENTRIES = 1 << 16


def upper_row_blocks(M: np.ndarray, min_entries: int = ROW_BLOCK_ENTRIES) -> Iterator[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield (values, rows, cols) over consecutive row ranges of the strict upper triangle, lexicographic order."""
    p = M.shape[0]
    i = 0
    while i < p - 1:
        values, rows, cols = [], [], []
        size = 0
        while i < p - 1 and size < min_entries:
            width = p - 1 - i
            values.append(M[i, i + 1:])
            rows.append(np.full(width, i, dtype=np.int64))
            cols.append(np.arange(i + 1, p, dtype=np.int64))
            size += width
            i += 1
        yield np.concatenate(values), np.concatenate(rows), np.concatenate(cols)


def _keep_largest(keys: np.ndarray, rows: np.ndarray, cols: np.ndarray, k: int):
    """k largest keys, ties to the lexicographically smallest (i, j); returned in rank order."""
    if keys.size > k:
        kth = np.partition(keys, keys.size - k)[keys.size - k]
        keep = np.flatnonzero(keys >= kth)
        keys, rows, cols = keys[keep], rows[keep], cols[keep]
    order = np.lexsort((cols, rows, -keys))[:k]
    return keys[order], rows[order], cols[order]


def _select(M: np.ndarray, k: int, sign: float) -> OrderStats:
    keys = np.empty(0)
    rows = cols = np.empty(0, dtype=np.int64)
    for values, block_rows, block_cols in upper_row_blocks(M, max(k, ROW_BLOCK_ENTRIES)):
        keys, rows, cols = _keep_largest(
            np.concatenate((keys, sign * values)),
            np.concatenate((rows, block_rows)),
            np.concatenate((cols, block_cols)),
            k,
        )
    return OrderStats(k=k, values=sign * keys, index=np.column_stack((rows, cols)))


def offdiag_extremes(M, k: int) -> Tuple[OrderStats, OrderStats]:
    """
    Top-k and bottom-k entries of the strict upper triangle.

    The triangle is streamed in row blocks; between blocks only the k
    current leaders survive, so at most k + block entries are held and
    only entries at or beyond the k-th order statistic are ever sorted.

    Args:
        M: symmetric matrix (S or R)
        k: number of order statistics on each side, 1 <= k <= p(p-1)/2

    Returns:
        (top, bottom) OrderStats
    """
    M = check_symmetric(M)
    p = M.shape[0]
    total = p * (p - 1) // 2
    if not 1 <= k <= total:
        raise DomainError(f"k={k} outside 1..{total} for p={p}")
    return _select(M, k, 1.0), _select(M, k, -1.0)

