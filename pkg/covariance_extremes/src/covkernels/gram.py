"""Gram, correlation and hypercubic tensor entries of a p x n data matrix."""

import itertools
import math
from typing import Iterator, Sequence, Tuple

import numpy as np

from src.utils.errors import DegenerateDiagonalError, DomainError
from src.utils.validators import check_data_matrix, check_symmetric


DEFAULT_BLOCK_COLUMNS = 2048
_CAUCHY_SCHWARZ_SLACK = 1e-10


def gram(X, block_columns: int = DEFAULT_BLOCK_COLUMNS) -> np.ndarray:
    """
    Non-normalized sample covariance S = sum_t x_t x_t^T.

    Observations are accumulated in column blocks; the upper triangle is
    mirrored at the end so S is exactly symmetric.

    Args:
        X: p x n data matrix, one observation per column
        block_columns: number of observations folded in per BLAS call

    Returns:
        p x p float64 array
    """
    X = check_data_matrix(X)
    p, n = X.shape
    S = np.zeros((p, p), dtype=np.float64)
    for start in range(0, n, block_columns):
        block = X[:, start:start + block_columns]
        S += block @ block.T
    upper = np.triu(S, 1)
    return upper + upper.T + np.diag(np.diag(S))


def correlation(S) -> np.ndarray:
    """R_ij = S_ij / sqrt(S_ii S_jj); unit diagonal, entries clipped to [-1, 1]."""
    S = check_symmetric(S)
    diag = np.diag(S)
    if np.any(diag <= 0):
        bad = np.flatnonzero(diag <= 0).tolist()
        raise DegenerateDiagonalError(f"zero diagonal entries at rows {bad}; correlation undefined")
    R = S / np.sqrt(np.outer(diag, diag))
    excess = float(np.max(np.abs(R))) - 1.0
    if excess > _CAUCHY_SCHWARZ_SLACK:
        raise DomainError(f"|R_ij| exceeds 1 by {excess:.3g}; input is not a Gram matrix")
    np.clip(R, -1.0, 1.0, out=R)
    np.fill_diagonal(R, 1.0)
    return R


def _check_tuple(idx: Sequence[int], p: int) -> Tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    if not idx:
        raise DomainError("index tuple is empty")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise DomainError(f"index tuple {idx} is not strictly increasing")
    if idx[0] < 0 or idx[-1] >= p:
        raise DomainError(f"index tuple {idx} out of range for p={p}")
    return idx


def tensor_entry(X, idx: Sequence[int]) -> float:
    """sum_t X[i_1, t] * ... * X[i_m, t] for a strictly increasing 0-based tuple."""
    X = check_data_matrix(X)
    idx = _check_tuple(idx, X.shape[0])
    head = np.prod(X[list(idx[:-1])], axis=0) if len(idx) > 1 else np.ones(X.shape[1])
    return float(np.dot(head, X[idx[-1]]))


def iter_tensor_entries(X, m: int, chunk: int = 4096) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """
    Yield (index_block, value_block) over all strictly increasing m-tuples
    in lexicographic order, chunk tuples at a time.
    """
    X = check_data_matrix(X)
    p = X.shape[0]
    if m < 1 or m > p:
        raise DomainError(f"tensor order m={m} must satisfy 1 <= m <= p={p}")
    combos = itertools.combinations(range(p), m)
    while True:
        block = np.array(list(itertools.islice(combos, chunk)), dtype=np.int64)
        if block.size == 0:
            return
        if m == 1:
            values = X[block[:, 0]].sum(axis=1)
        else:
            prod = X[block[:, 0]].copy()
            for col in range(1, m - 1):
                prod *= X[block[:, col]]
            values = np.einsum("kt,kt->k", prod, X[block[:, m - 1]])
        yield block, values


def tensor_size(p: int, m: int) -> int:
    return math.comb(p, m)
