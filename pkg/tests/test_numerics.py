import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exactnmf.exceptions import RankMismatch, Singular, ZeroVector
from exactnmf.numerics import as_matrix, complete_to_basis, invert, rank, rank_factor, solve_linear


def test_rank_examples():
    assert rank(np.eye(3)) == 3
    assert rank(np.zeros((2, 3))) == 0
    assert rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1


def test_rank_factor_identity():
    W0, H0 = rank_factor(np.eye(3), 3)
    np.testing.assert_allclose(W0 @ H0, np.eye(3), atol=1e-12)


def test_rank_factor_outer_product():
    A = np.outer([1.0, 2.0, 3.0], [4.0, 5.0])
    W0, H0 = rank_factor(A, 1)
    assert W0.shape == (3, 1) and H0.shape == (1, 2)
    np.testing.assert_allclose(W0 @ H0, A, atol=1e-12)


def test_rank_factor_rejects_wrong_k():
    with pytest.raises(RankMismatch):
        rank_factor(np.eye(3), 2)


def test_invert_examples():
    np.testing.assert_array_equal(invert(np.eye(2)), np.eye(2))
    np.testing.assert_allclose(invert(np.diag([2.0, 4.0])), np.diag([0.5, 0.25]))
    np.testing.assert_allclose(invert(np.array([[1.0, 1.0], [0.0, 1.0]])), [[1.0, -1.0], [0.0, 1.0]])


def test_invert_singular():
    with pytest.raises(Singular):
        invert(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_solve_linear_examples():
    np.testing.assert_allclose(solve_linear(np.eye(2), [3.0, 7.0]), [3.0, 7.0])
    np.testing.assert_allclose(solve_linear(np.diag([2.0, 5.0]), [2.0, 5.0]), [1.0, 1.0])
    np.testing.assert_allclose(solve_linear(np.array([[2.0, 1.0], [1.0, 3.0]]), [5.0, 10.0]), [1.0, 3.0])


def test_solve_linear_matrix_rhs():
    M = np.array([[2.0, 1.0], [1.0, 3.0]])
    R = np.array([[5.0, 1.0], [10.0, 0.0]])
    np.testing.assert_allclose(M @ solve_linear(M, R), R, atol=1e-12)


@pytest.mark.parametrize("v", [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [1.0, 1.0], [0.0, -3.0, 2.0]])
def test_complete_to_basis(v):
    B = complete_to_basis(v)
    np.testing.assert_array_equal(B[:, -1], v)
    assert abs(np.linalg.det(B)) > 0


def test_complete_to_basis_unit_is_identity():
    np.testing.assert_array_equal(complete_to_basis([0.0, 0.0, 1.0]), np.eye(3))


def test_complete_to_basis_zero():
    with pytest.raises(ZeroVector):
        complete_to_basis([0.0, 0.0])


@pytest.mark.parametrize("bad", [np.zeros((0, 3)), np.zeros((3, 0)), np.array([[np.nan]]), np.ones(3)])
def test_as_matrix_rejects(bad):
    with pytest.raises(ValueError):
        as_matrix(bad)


def test_rank_of_random_products(rng):
    for _ in range(100):
        m, n = rng.integers(1, 9, 2)
        k = int(rng.integers(1, min(m, n) + 1))
        A = rng.normal(size=(m, k)) @ rng.normal(size=(k, n))
        assert rank(A) == k


def test_rank_factor_reconstructs(rng):
    for _ in range(200):
        m, n = rng.integers(1, 9, 2)
        k = int(rng.integers(1, min(m, n) + 1))
        A = rng.normal(size=(m, k)) @ rng.normal(size=(k, n))
        W0, H0 = rank_factor(A, k)
        assert rank(W0) == k and rank(H0) == k
        assert np.max(np.abs(A - W0 @ H0)) <= 1e-9 * max(1.0, np.max(np.abs(A)))


def test_double_inverse(rng):
    for _ in range(50):
        k = int(rng.integers(1, 7))
        Q = rng.normal(size=(k, k)) + k * np.eye(k)
        np.testing.assert_allclose(invert(invert(Q)), Q, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_rank_invariant_under_row_ops(m, n, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, min(m, n) + 1))
    A = rng.normal(size=(m, k)) @ rng.normal(size=(k, n))
    scaled = A[rng.permutation(m)] * rng.uniform(0.5, 2.0, size=(m, 1))
    assert rank(scaled) == rank(A) == k
