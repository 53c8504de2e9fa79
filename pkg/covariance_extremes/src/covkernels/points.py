"""
Normalized point clouds.

Each function maps a Gram/correlation matrix to the atoms of one of the
point processes whose limit is Poisson with mean measure e^{-x} dx (or a
Frechet measure for heavy-tailed diagonals). Values are affine images of
the matrix entries; only the upper triangle i < j is enumerated, in
lexicographic order. Indices are 0-based.
"""

import functools
import math
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np
import pandas as pd

from src.covkernels.gram import iter_tensor_entries
from src.norming import d_p, d_p_m, tilde_d_p
from src.utils.errors import DomainError
from src.utils.validators import check_data_matrix, check_symmetric


@dataclass(frozen=True)
class NormedPoint:
    index: Tuple[int, ...]
    value: float


@dataclass(frozen=True)
class PointCloud:
    values: np.ndarray
    index: np.ndarray

    def __len__(self) -> int:
        return int(self.values.size)

    def points(self) -> Iterator[NormedPoint]:
        for idx, value in zip(self.index, self.values):
            yield NormedPoint(index=tuple(int(i) for i in idx), value=float(value))

    def count_in(self, a: float, b: float = math.inf) -> int:
        """Number of atoms in the window (a, b]."""
        return int(np.count_nonzero((self.values > a) & (self.values <= b)))

    def to_frame(self) -> pd.DataFrame:
        cols = {f"i{c + 1}": self.index[:, c] + 1 for c in range(self.index.shape[1])}
        cols["value"] = self.values
        return pd.DataFrame(cols)


@functools.lru_cache(maxsize=8)
def _pairs(p: int) -> Tuple[np.ndarray, np.ndarray]:
    """Upper-triangle index arrays, built once per p and shared read-only."""
    rows, cols = np.triu_indices(p, 1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def _require_p3(p: int) -> None:
    if p < 3:
        raise DomainError(f"normalized points need p >= 3, got p={p}")


def _diagonal(S) -> np.ndarray:
    """Diagonal of a symmetric matrix, or the vector of diagonal entries itself."""
    arr = np.asarray(S, dtype=float)
    if arr.ndim == 1:
        return arr
    return np.diag(check_symmetric(arr))


def _pair_cloud(values: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> PointCloud:
    return PointCloud(values=values, index=np.column_stack((rows, cols)))


def normalized_offdiag_points(S, n: int) -> PointCloud:
    """Atoms d~_p (S_ij / sqrt(n) - d~_p), i < j."""
    S = check_symmetric(S)
    p = S.shape[0]
    _require_p3(p)
    d = tilde_d_p(p)
    rows, cols = _pairs(p)
    return _pair_cloud(d * (S[rows, cols] / math.sqrt(n) - d), rows, cols)


def lower_normalized_points(S, n: int) -> PointCloud:
    """Atoms d~_p (S_ij / sqrt(n) + d~_p); their minimum is minus the maximum for -S."""
    S = check_symmetric(S)
    p = S.shape[0]
    _require_p3(p)
    d = tilde_d_p(p)
    rows, cols = _pairs(p)
    return _pair_cloud(d * (S[rows, cols] / math.sqrt(n) + d), rows, cols)


def normalized_corr_points(R, n: int, p: int | None = None) -> PointCloud:
    """Atoms d~_p (sqrt(n) R_ij - d~_p), i < j."""
    R = check_symmetric(R)
    p = R.shape[0] if p is None else p
    if p != R.shape[0]:
        raise DomainError(f"p={p} does not match matrix of size {R.shape[0]}")
    _require_p3(p)
    d = tilde_d_p(p)
    rows, cols = _pairs(p)
    return _pair_cloud(d * (math.sqrt(n) * R[rows, cols] - d), rows, cols)


def squared_points(S, n: int, p: int | None = None) -> PointCloud:
    """Atoms S_ij^2 / (2n) - d~_p^2 / 2 - log 2."""
    S = check_symmetric(S)
    p = S.shape[0] if p is None else p
    _require_p3(p)
    d = tilde_d_p(p)
    rows, cols = _pairs(p)
    entries = S[rows, cols]
    return _pair_cloud(entries * entries / (2.0 * n) - 0.5 * d * d - math.log(2.0), rows, cols)


def diagonal_points(S, n: int, var_x2: float, p: int | None = None) -> PointCloud:
    """Atoms d_p ((S_ii - n) / sqrt(n Var(X^2)) - d_p), with d_p at count p."""
    if not var_x2 > 0:
        raise DomainError(f"Var(X^2) must be positive, got {var_x2}")
    diag = _diagonal(S)
    p = diag.size if p is None else p
    d = d_p(p)
    values = d * ((diag - n) / math.sqrt(n * var_x2) - d)
    return PointCloud(values=values, index=np.arange(diag.size).reshape(-1, 1))


def heavy_tail_diag_points(S, n: int, p: int | None, a_np: float) -> PointCloud:
    """Atoms (S_ii - n) / a_np^2."""
    if not a_np > 0:
        raise DomainError(f"a_np must be positive, got {a_np}")
    values = (_diagonal(S) - n) / (a_np * a_np)
    return PointCloud(values=values, index=np.arange(values.size).reshape(-1, 1))


def tensor_points(X, m: int) -> PointCloud:
    """Atoms d_{p,m} (S^(m)_{i_1..i_m} / sqrt(n) - d_{p,m}) over strictly increasing m-tuples."""
    X = check_data_matrix(X)
    p, n = X.shape
    d = d_p_m(p, m)
    blocks = []
    values = []
    for block, entries in iter_tensor_entries(X, m):
        blocks.append(block)
        values.append(d * (entries / math.sqrt(n) - d))
    return PointCloud(values=np.concatenate(values), index=np.concatenate(blocks))


def tensor_extremes(X, m: int) -> Tuple[float, float]:
    """Largest and smallest tensor entries scaled by sqrt(n log p); both tend to +-sqrt(2m)."""
    X = check_data_matrix(X)
    p, n = X.shape
    if p < 2:
        raise DomainError("tensor extremes need p >= 2")
    hi, lo = -math.inf, math.inf
    for _, entries in iter_tensor_entries(X, m):
        hi = max(hi, float(entries.max()))
        lo = min(lo, float(entries.min()))
    scale = math.sqrt(n * math.log(p))
    return hi / scale, lo / scale
