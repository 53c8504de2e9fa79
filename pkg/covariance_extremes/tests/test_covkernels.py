"""
Gram/correlation/tensor kernels, normalized point clouds, top-k selection
and the spectral norm, checked against direct oracles.
"""

import sys
import os
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import itertools
import math

import numpy as np
import pytest

from src.covkernels import (
    correlation,
    diagonal_points,
    gram,
    heavy_tail_diag_points,
    iter_tensor_entries,
    lower_normalized_points,
    normalized_corr_points,
    normalized_offdiag_points,
    offdiag_dominance_ratio,
    offdiag_extremes,
    operator_norm,
    start_vectors,
    squared_points,
    tensor_entry,
    tensor_extremes,
    tensor_points,
    tensor_size,
    upper_row_blocks,
)
from src.covkernels import order_stats, points
from src.norming import d_p, d_p_m, tilde_d_p
from src.utils.errors import DegenerateDiagonalError, DomainError, NonConvergenceError


def _random_data(rng, max_p=12, max_n=30):
    p = int(rng.integers(2, max_p + 1))
    n = int(rng.integers(1, max_n + 1))
    return rng.standard_normal((p, n))


def _naive_gram(X):
    p, n = X.shape
    S = np.empty((p, p))
    for i in range(p):
        for j in range(p):
            S[i, j] = math.fsum(X[i, t] * X[j, t] for t in range(n))
    return S


# ============================================
# gram / correlation
# ============================================
def test_gram_hand_example():
    X = np.array([[1.0, 2.0, -1.0], [0.0, 1.0, 1.0]])
    S = gram(X)
    assert S.tolist() == [[6.0, 1.0], [1.0, 2.0]]


def test_gram_zero_row_gives_zero_row_and_column():
    X = np.array([[0.0, 0.0, 0.0], [1.0, -1.0, 2.0], [3.0, 0.5, 1.0]])
    S = gram(X)
    assert np.all(S[0] == 0.0)
    assert np.all(S[:, 0] == 0.0)


def test_gram_matches_compensated_oracle():
    rng = np.random.default_rng(101)
    for _ in range(100):
        X = _random_data(rng)
        S = gram(X)
        bound = 1e-10 * (np.abs(X) @ np.abs(X).T) + 1e-300
        assert np.all(np.abs(S - _naive_gram(X)) <= bound)


def test_gram_exactly_symmetric_and_psd():
    rng = np.random.default_rng(7)
    for _ in range(20):
        X = _random_data(rng)
        S = gram(X, block_columns=4)
        assert np.array_equal(S, S.T)
        eig = np.linalg.eigvalsh(S)
        assert eig.min() >= -1e-10 * max(1.0, eig.max())


def test_gram_blocking_does_not_change_the_result():
    rng = np.random.default_rng(11)
    X = rng.standard_normal((6, 50))
    assert np.allclose(gram(X, block_columns=3), gram(X), rtol=1e-13, atol=1e-12)


def test_gram_rejects_non_finite_data():
    with pytest.raises(DomainError):
        gram(np.array([[1.0, np.nan]]))


def test_correlation_hand_example():
    S = np.array([[6.0, 1.0], [1.0, 2.0]])
    R = correlation(S)
    assert R[0, 1] == pytest.approx(1 / math.sqrt(12), abs=1e-15)
    assert R[0, 0] == 1.0 and R[1, 1] == 1.0


def test_correlation_of_identical_rows_is_one():
    X = np.array([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [0.0, 1.0, -1.0]])
    R = correlation(gram(X))
    assert R[0, 1] == pytest.approx(1.0, abs=1e-15)


def test_correlation_matches_definition_and_is_bounded():
    rng = np.random.default_rng(23)
    for _ in range(100):
        X = _random_data(rng)
        S = gram(X)
        if np.any(np.diag(S) <= 0):
            continue
        R = correlation(S)
        oracle = S / np.sqrt(np.outer(np.diag(S), np.diag(S)))
        off = ~np.eye(S.shape[0], dtype=bool)
        assert np.allclose(R[off], oracle[off], rtol=1e-12, atol=1e-12)
        assert np.all(np.diag(R) == 1.0)
        assert np.all(np.abs(R) <= 1.0)


def test_correlation_rejects_zero_diagonal():
    S = np.array([[0.0, 0.0], [0.0, 2.0]])
    with pytest.raises(DegenerateDiagonalError):
        correlation(S)
    with pytest.raises(DomainError):
        correlation(S)


# ============================================
# tensor entries
# ============================================
def test_tensor_entry_hand_example():
    X = np.array([[1.0, 1.0], [1.0, -1.0], [1.0, 2.0]])
    assert tensor_entry(X, (0, 1, 2)) == -1.0


def test_tensor_entry_order_two_is_gram_entry():
    X = np.array([[1.0, 2.0, -1.0], [0.0, 1.0, 1.0]])
    assert tensor_entry(X, (0, 1)) == 1.0


def test_tensor_entry_matches_naive_product_sum():
    rng = np.random.default_rng(5)
    for _ in range(100):
        p = int(rng.integers(3, 8))
        X = rng.standard_normal((p, int(rng.integers(1, 20))))
        idx = tuple(sorted(rng.choice(p, size=3, replace=False).tolist()))
        oracle = math.fsum(X[idx[0], t] * X[idx[1], t] * X[idx[2], t] for t in range(X.shape[1]))
        assert tensor_entry(X, idx) == pytest.approx(oracle, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("idx", [(1, 1, 2), (2, 1), (0, 5), (-1, 2)])
def test_tensor_entry_rejects_bad_tuples(idx):
    X = np.ones((4, 3))
    with pytest.raises(DomainError):
        tensor_entry(X, idx)


def test_tensor_order_two_agrees_with_gram_on_integer_data():
    rng = np.random.default_rng(9)
    X = rng.integers(-3, 4, size=(6, 12)).astype(float)
    S = gram(X)
    for block, values in iter_tensor_entries(X, 2):
        for (i, j), value in zip(block, values):
            assert value == S[i, j]


def test_iter_tensor_entries_enumerates_every_tuple_in_order():
    X = np.arange(15, dtype=float).reshape(5, 3)
    blocks = [b for b, _ in iter_tensor_entries(X, 3, chunk=4)]
    flat = [tuple(row) for block in blocks for row in block.tolist()]
    assert flat == list(itertools.combinations(range(5), 3))
    assert len(flat) == tensor_size(5, 3)


# ============================================
# normalized point clouds
# ============================================
@pytest.mark.parametrize("p", [3, 10, 50])
def test_offdiag_points_count(p):
    S = np.eye(p)
    assert len(normalized_offdiag_points(S, 10)) == p * (p - 1) // 2


def test_offdiag_points_centering():
    p, n = 3, 16
    d = tilde_d_p(p)
    S = np.full((p, p), math.sqrt(n) * d)
    cloud = normalized_offdiag_points(S, n)
    assert np.allclose(cloud.values, 0.0, atol=1e-12)


def test_offdiag_points_match_formula_and_invert():
    rng = np.random.default_rng(31)
    X = rng.standard_normal((8, 40))
    S, n = gram(X), 40
    d = tilde_d_p(8)
    cloud = normalized_offdiag_points(S, n)
    for point in cloud.points():
        i, j = point.index
        assert i < j
        assert point.value == pytest.approx(d * (S[i, j] / math.sqrt(n) - d), rel=1e-12, abs=1e-12)
        assert math.sqrt(n) * (point.value / d + d) == pytest.approx(S[i, j], rel=1e-10, abs=1e-10)


def test_offdiag_points_reject_small_p():
    with pytest.raises(DomainError):
        normalized_offdiag_points(np.eye(2), 5)


def test_lower_points_minimum_is_negated_maximum_for_minus_s():
    rng = np.random.default_rng(41)
    S = gram(rng.standard_normal((7, 25)))
    low = lower_normalized_points(S, 25).values.min()
    high = normalized_offdiag_points(-S, 25).values.max()
    assert low == pytest.approx(-high, rel=1e-14, abs=1e-14)


def test_corr_points_centering():
    p, n = 3, 25
    d = tilde_d_p(p)
    R = np.full((p, p), d / math.sqrt(n))
    np.fill_diagonal(R, 1.0)
    assert np.allclose(normalized_corr_points(R, n).values, 0.0, atol=1e-12)


def test_corr_points_equal_covariance_points_for_rademacher_rows():
    rng = np.random.default_rng(3)
    n = 30
    X = rng.choice([-1.0, 1.0], size=(9, n))
    S = gram(X)
    assert np.all(np.diag(S) == n)
    corr = normalized_corr_points(correlation(S), n).values
    cov = normalized_offdiag_points(S, n).values
    assert np.allclose(corr, cov, rtol=1e-12, atol=1e-9)


def test_squared_points_at_zero_entry():
    p = 5
    d = tilde_d_p(p)
    cloud = squared_points(np.eye(p), 10)
    assert np.allclose(cloud.values, -0.5 * d * d - math.log(2.0), rtol=1e-14)


def test_squared_points_ignore_sign():
    rng = np.random.default_rng(13)
    S = gram(rng.standard_normal((6, 20)))
    flipped = 2 * np.diag(np.diag(S)) - S
    assert np.array_equal(squared_points(S, 20).values, squared_points(flipped, 20).values)


def test_diagonal_points_center_and_formula():
    p, n, var_x2 = 6, 50, 2.0
    d = d_p(p)
    cloud = diagonal_points(n * np.eye(p), n, var_x2)
    assert len(cloud) == p
    assert np.allclose(cloud.values, -d * d, rtol=1e-14)

    rng = np.random.default_rng(17)
    S = gram(rng.standard_normal((p, n)))
    values = diagonal_points(S, n, var_x2).values
    expected = d * ((np.diag(S) - n) / math.sqrt(n * var_x2) - d)
    assert np.allclose(values, expected, rtol=1e-12)


def test_diagonal_points_need_positive_variance():
    with pytest.raises(DomainError):
        diagonal_points(np.eye(4), 4, 0.0)


def test_heavy_tail_diag_points_are_linear():
    n, a = 20, 3.0
    assert np.all(heavy_tail_diag_points(n * np.eye(4), n, None, a).values == 0.0)
    S = np.diag([n + 9.0, n - 18.0, n + 0.0])
    assert np.allclose(heavy_tail_diag_points(S, n, None, a).values, [1.0, -2.0, 0.0])
    with pytest.raises(DomainError):
        heavy_tail_diag_points(S, n, None, 0.0)


def test_tensor_points_count_and_formula():
    rng = np.random.default_rng(19)
    p, n, m = 6, 15, 3
    X = rng.standard_normal((p, n))
    cloud = tensor_points(X, m)
    d = d_p_m(p, m)
    assert len(cloud) == math.comb(p, m)
    for point in itertools.islice(cloud.points(), 10):
        expected = d * (tensor_entry(X, point.index) / math.sqrt(n) - d)
        assert point.value == pytest.approx(expected, rel=1e-10, abs=1e-10)


def test_tensor_extremes_are_ordered():
    rng = np.random.default_rng(29)
    hi, lo = tensor_extremes(rng.standard_normal((8, 40)), 3)
    assert hi >= lo


def test_point_cloud_window_counts_are_half_open():
    cloud = normalized_offdiag_points(np.eye(3), 4)
    value = float(cloud.values[0])
    assert cloud.count_in(value - 1.0, value) == 3
    assert cloud.count_in(value, value + 1.0) == 0


def test_point_cloud_frame_is_one_based():
    frame = normalized_offdiag_points(np.eye(3), 4).to_frame()
    assert list(frame.columns) == ["i1", "i2", "value"]
    assert frame[["i1", "i2"]].values.tolist() == [[1, 2], [1, 3], [2, 3]]


# ============================================
# top-k / bottom-k
# ============================================
def test_offdiag_extremes_hand_example():
    S = np.array([[0.0, 5.0, -2.0], [5.0, 0.0, 0.0], [-2.0, 0.0, 0.0]])
    top, bottom = offdiag_extremes(S, 2)
    assert top.values.tolist() == [5.0, 0.0]
    assert top.index.tolist() == [[0, 1], [1, 2]]
    assert bottom.values.tolist() == [-2.0, 0.0]
    assert bottom.index.tolist() == [[0, 2], [1, 2]]


def _sorted_oracle(M):
    p = M.shape[0]
    entries = [(float(M[i, j]), (i, j)) for i in range(p) for j in range(i + 1, p)]
    top = sorted(entries, key=lambda e: (-e[0], e[1]))
    bottom = sorted(entries, key=lambda e: (e[0], e[1]))
    return top, bottom


def test_offdiag_extremes_match_full_sort_with_ties():
    rng = np.random.default_rng(37)
    for _ in range(100):
        p = int(rng.integers(2, 13))
        A = rng.integers(-4, 5, size=(p, p)).astype(float)
        M = A + A.T
        total = p * (p - 1) // 2
        k = int(rng.integers(1, total + 1))
        top, bottom = offdiag_extremes(M, k)
        oracle_top, oracle_bottom = _sorted_oracle(M)
        assert top.descending == oracle_top[:k]
        assert bottom.descending == oracle_bottom[:k]


def test_upper_row_blocks_follow_triangle_order():
    rng = np.random.default_rng(41)
    A = rng.standard_normal((9, 9))
    M = A + A.T
    rows, cols = np.triu_indices(9, 1)
    for min_entries in (1, 5, 36):
        blocks = list(upper_row_blocks(M, min_entries))
        assert np.array_equal(np.concatenate([b[1] for b in blocks]), rows)
        assert np.array_equal(np.concatenate([b[2] for b in blocks]), cols)
        assert np.array_equal(np.concatenate([b[0] for b in blocks]), M[rows, cols])
    assert len(list(upper_row_blocks(M, 1))) == 8
    assert len(list(upper_row_blocks(M, 36))) == 1


def test_offdiag_extremes_streamed_in_single_rows_match_full_sort(monkeypatch):
    monkeypatch.setattr(order_stats, "ROW_BLOCK_ENTRIES", 1)
    rng = np.random.default_rng(47)
    for _ in range(100):
        p = int(rng.integers(2, 13))
        A = rng.integers(-3, 4, size=(p, p)).astype(float)
        M = A + A.T
        k = int(rng.integers(1, min(4, p * (p - 1) // 2) + 1))
        top, bottom = offdiag_extremes(M, k)
        oracle_top, oracle_bottom = _sorted_oracle(M)
        assert top.descending == oracle_top[:k]
        assert bottom.descending == oracle_bottom[:k]


def test_pair_indices_are_cached_and_read_only():
    first = points._pairs(7)
    assert points._pairs(7)[0] is first[0]
    with pytest.raises(ValueError):
        first[0][0] = 3


def test_offdiag_extremes_full_k_is_sorted_order():
    rng = np.random.default_rng(43)
    A = rng.standard_normal((6, 6))
    M = A + A.T
    top, _ = offdiag_extremes(M, 15)
    assert np.all(np.diff(top.values) <= 0)
    assert sorted(top.values.tolist()) == sorted(M[np.triu_indices(6, 1)].tolist())


@pytest.mark.parametrize("k", [0, 4])
def test_offdiag_extremes_rejects_k_out_of_range(k):
    with pytest.raises(DomainError):
        offdiag_extremes(np.eye(3), k)


def test_order_stats_frame():
    S = np.array([[0.0, 5.0, -2.0], [5.0, 0.0, 0.0], [-2.0, 0.0, 0.0]])
    top, _ = offdiag_extremes(S, 1)
    frame = top.to_frame("top")
    assert frame.iloc[0][["i", "j"]].tolist() == [1, 2]
    assert frame.iloc[0]["value"] == 5.0


# ============================================
# operator norm
# ============================================
def test_operator_norm_of_diagonal_matrices():
    assert operator_norm(np.eye(4)) == pytest.approx(1.0, rel=1e-12)
    assert operator_norm(np.diag([3.0, -5.0])) == pytest.approx(5.0, rel=1e-8)


def test_operator_norm_zero_matrix():
    assert operator_norm(np.zeros((3, 3))) == 0.0


def test_operator_norm_of_rank_one_matrix():
    assert operator_norm(np.ones((2, 2))) == pytest.approx(2.0, rel=1e-8)


def test_operator_norm_when_first_start_vector_is_in_the_kernel():
    w = start_vectors(5)[0]
    M = np.eye(5) - np.outer(w, w)
    assert operator_norm(M) == pytest.approx(1.0, rel=1e-8)


def test_operator_norm_of_two_by_two_with_sign_patterned_eigenvectors():
    # eigenvectors (1, 1) and (1, -1)
    assert operator_norm(np.array([[2.0, 1.0], [1.0, 2.0]])) == pytest.approx(3.0, rel=1e-8)
    assert operator_norm(np.array([[2.0, -1.0], [-1.0, 2.0]])) == pytest.approx(3.0, rel=1e-8)


@pytest.mark.parametrize("p", [2, 4, 6, 8, 9])
def test_operator_norm_of_equicorrelated_offdiagonal(p):
    M = 0.3 * (np.ones((p, p)) - np.eye(p))
    assert operator_norm(M) == pytest.approx(0.3 * (p - 1), rel=1e-8)


def test_operator_norm_of_alternating_sign_dominant_eigenvector():
    x = np.where(np.arange(6) % 2 == 0, 1.0, -1.0)
    M = np.outer(x, x) / 6.0 * 4.0 + 0.5 * np.eye(6)
    assert operator_norm(M) == pytest.approx(4.5, rel=1e-8)


def test_start_vectors_are_fixed_unit_vectors():
    first, second = start_vectors(7), start_vectors(7)
    for a, b in zip(first, second):
        assert np.array_equal(a, b)
        assert np.linalg.norm(a) == pytest.approx(1.0)


def test_operator_norm_matches_eigendecomposition():
    rng = np.random.default_rng(1234)
    for _ in range(100):
        p = int(rng.integers(2, 11))
        A = rng.standard_normal((p, p))
        M = (A + A.T) / 2
        expected = float(np.max(np.abs(np.linalg.eigvalsh(M))))
        assert operator_norm(M) == pytest.approx(expected, rel=1e-6)


def test_operator_norm_reports_non_convergence():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((5, 5))
    with pytest.raises(NonConvergenceError) as excinfo:
        operator_norm(A + A.T, max_iter=1)
    assert excinfo.value.last_iterate is not None


def test_offdiag_dominance_ratio_of_diagonal_matrix():
    assert offdiag_dominance_ratio(np.diag([1.0, 4.0, 2.0])) == 0.0
