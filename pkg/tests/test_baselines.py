import itertools

import numpy as np
import pytest

from oracles import exhaustive_l0
from thzamp.baselines import cosamp, least_squares, oracle_ls
from thzamp.core import nmse
from thzamp.sensing import from_array, gaussian_matrix
from thzamp.signals import add_noise, strictly_sparse


def test_ls_square_exact():
    A = gaussian_matrix(12, 12, 0)
    h = np.random.default_rng(0).standard_normal(12)
    np.testing.assert_allclose(least_squares(A, A.forward(h)), h, atol=1e-8)


def test_ls_minimum_norm_underdetermined():
    A = gaussian_matrix(6, 15, 1)
    y = np.random.default_rng(1).standard_normal(6)
    x = least_squares(A, y)
    np.testing.assert_allclose(A.forward(x), y, atol=1e-8)
    # minimum norm <=> x lies in the row space, orthogonal to the null space
    null = np.linalg.svd(A.entries)[2][6:]
    np.testing.assert_allclose(null @ x, 0, atol=1e-10)


def test_ls_hand_computed_normal_equations():
    # A^T A = [[2, 1], [1, 2]], A^T y = [5, 6]  ->  x = [4/3, 7/3]
    A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    np.testing.assert_allclose(least_squares(A, [1.0, 2.0, 4.0]), [4 / 3, 7 / 3], rtol=1e-12)


def test_ls_rank_deficient_does_not_crash():
    A = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    x = least_squares(A, [1.0, 2.0, 3.0])
    np.testing.assert_allclose(A @ x, [1.0, 2.0, 3.0], atol=1e-10)


def test_ls_residual_is_first_order_optimal():
    A = gaussian_matrix(30, 10, 2)
    y = np.random.default_rng(2).standard_normal(30)
    x = least_squares(A, y)
    base = np.linalg.norm(y - A.forward(x))
    rng = np.random.default_rng(3)
    for _ in range(100):
        d = 1e-4 * rng.standard_normal(10)
        assert np.linalg.norm(y - A.forward(x + d)) >= base - 1e-8


def test_oracle_ls_exact_on_true_support():
    A = gaussian_matrix(20, 50, 3)
    s = strictly_sparse(50, 4, 4)
    est = oracle_ls(A, A.forward(s.values), s.support)
    np.testing.assert_allclose(est, s.values, atol=1e-8)
    assert not np.any(np.delete(est, s.support))


def test_oracle_ls_full_support_equals_ls():
    A = gaussian_matrix(10, 6, 5)
    y = np.random.default_rng(5).standard_normal(10)
    np.testing.assert_allclose(oracle_ls(A, y, np.arange(6)), least_squares(A, y), atol=1e-12)


def test_oracle_ls_restricted_pseudo_inverse():
    A = gaussian_matrix(6, 5, 6)
    y = np.random.default_rng(6).standard_normal(6)
    support = [1, 3]
    sub = A.entries[:, support]
    expected = np.zeros(5)
    expected[support] = np.linalg.inv(sub.T @ sub) @ sub.T @ y
    np.testing.assert_allclose(oracle_ls(A, y, support), expected, rtol=1e-10)


def test_oracle_ls_rejects_oversized_support():
    A = gaussian_matrix(3, 8, 7)
    with pytest.raises(ValueError):
        oracle_ls(A, np.ones(3), [0, 1, 2, 3])
    with pytest.raises(ValueError):
        oracle_ls(A, np.ones(3), [9])


def test_cosamp_zero_sparsity():
    A = gaussian_matrix(5, 10, 0)
    res = cosamp(A, np.ones(5), 0)
    assert not np.any(res.estimate)


def test_cosamp_orthonormal_one_pass():
    Q = np.linalg.qr(np.random.default_rng(8).standard_normal((20, 20)))[0]
    A = from_array(Q)
    y = np.random.default_rng(9).standard_normal(20)
    proxy = A.adjoint(y)
    expected = np.zeros(20)
    top = np.argsort(-np.abs(proxy))[:3]
    expected[top] = proxy[top]
    res = cosamp(A, y, 3, max_iters=1)
    np.testing.assert_allclose(res.estimate, expected, atol=1e-12)


def test_cosamp_matches_exhaustive_search():
    A = gaussian_matrix(16, 32, 10)
    h = strictly_sparse(32, 2, 11).values
    y = A.forward(h)
    target = exhaustive_l0(A.entries, y, 2)
    res = cosamp(A, y, 2)
    np.testing.assert_allclose(res.estimate, target, atol=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_cosamp_sparsity_bound(seed):
    A = gaussian_matrix(30, 80, seed)
    y, _ = add_noise(A.forward(strictly_sparse(80, 6, seed).values), 10, seed)
    for k in (1, 4, 9):
        assert np.count_nonzero(cosamp(A, y, k).estimate) <= k


def test_cosamp_agrees_with_oracle_ls_when_easy():
    A = gaussian_matrix(60, 120, 12)
    s = strictly_sparse(120, 5, 13)
    y = A.forward(s.values)
    est = cosamp(A, y, 5).estimate
    assert abs(nmse(est, s.values) - nmse(oracle_ls(A, y, s.support), s.values)) < 1e-6


def test_cosamp_rank_deficient_merge_uses_ridge():
    # 2k merged columns exceed m: least squares on the merged set is rank deficient
    A = gaussian_matrix(4, 12, 14)
    y = A.forward(strictly_sparse(12, 3, 15).values)
    res = cosamp(A, y, 3, max_iters=5)
    assert np.all(np.isfinite(res.estimate))
    assert np.count_nonzero(res.estimate) <= 3
