import numpy as np
import pytest

from conftest import random_nonneg_product
from exactnmf.exceptions import (
    DegenerateSimplex,
    InvalidInstance,
    NegativeEntries,
    NotNormalized,
    RankMismatch,
)
from exactnmf.geometry import Simplex
from exactnmf.reductions import (
    FactorPair,
    NmfInstance,
    P1Instance,
    PipelineState,
    RestrictedP1Instance,
    nmf_to_p1,
    normalize_q,
    p1_solution_to_nmf,
    p1_to_restricted,
    q_to_simplex_solution,
    restricted_solution_to_p1,
    restricted_to_simplex,
    simplex_solution_to_q,
    simplex_to_restricted,
    solve_exact_nmf,
    verify_factorization,
)
from exactnmf.sat_gadget import lemma_gadget
from exactnmf.simplex_search import verify_solution


def test_nmf_instance_validation():
    with pytest.raises(RankMismatch):
        NmfInstance(np.ones((2, 2)), 2)
    with pytest.raises(NegativeEntries):
        NmfInstance(np.array([[1.0, -1.0]]), 1)
    inst = NmfInstance(np.array([[1.0, -1e-12], [0.0, 1.0]]), 2)
    assert inst.A[0, 1] == 0.0
    with pytest.raises(ValueError):
        NmfInstance(np.ones((2, 2)), 0)


def test_nmf_to_p1_examples(rng):
    p1 = nmf_to_p1(NmfInstance(np.eye(2), 2))
    np.testing.assert_allclose(p1.W0 @ p1.H0, np.eye(2))
    p1 = nmf_to_p1(NmfInstance(np.ones((2, 2)), 1))
    assert p1.W0.shape == (2, 1)
    A, _, _ = random_nonneg_product(rng, 4, 3, 2)
    p1 = nmf_to_p1(NmfInstance(A, 2))
    assert np.max(np.abs(p1.W0 @ p1.H0 - A)) <= 1e-9


def test_p1_solution_identity_and_permutation(rng):
    A, W, H = random_nonneg_product(rng, 5, 4, 3)
    inst = P1Instance(W, H)
    pair = p1_solution_to_nmf(inst, np.eye(3))
    np.testing.assert_array_equal(pair.W, W)
    np.testing.assert_array_equal(pair.H, H)
    perm = np.eye(3)[[2, 0, 1]]
    pair = p1_solution_to_nmf(inst, perm)
    np.testing.assert_allclose(pair.W @ pair.H, A)
    assert np.min(pair.W) >= 0 and np.min(pair.H) >= 0


def test_p1_solution_rejects_non_solution(rng):
    _, W, H = random_nonneg_product(rng, 5, 4, 3)
    Q = np.eye(3)
    Q[0, 1] = -5.0
    with pytest.raises(NegativeEntries) as info:
        p1_solution_to_nmf(P1Instance(W, H), Q)
    assert info.value.where[0] in ("W", "H") and info.value.value < 0


def test_restricted_fixed_point():
    W0 = np.array([[0.5, 1.0], [0.2, 1.0], [0.9, 1.0]])
    H0 = np.array([[1.0, -1.0], [0.0, 1.0]])  # H0 e = e_k
    out, tr = p1_to_restricted(P1Instance(W0, H0))
    np.testing.assert_array_equal(out.W0, W0)
    np.testing.assert_array_equal(out.H0, H0)
    np.testing.assert_array_equal(tr.Qhat, np.eye(2))
    np.testing.assert_array_equal(tr.D_diag, np.ones(3))
    assert tr.deleted_rows == ()


def test_restricted_deletes_zero_row(rng):
    A, W, H = random_nonneg_product(rng, 4, 4, 2)
    A = np.vstack([A[:2], np.zeros((1, 4)), A[2:]])
    p1 = nmf_to_p1(NmfInstance(A, 2))
    out, tr = p1_to_restricted(p1)
    assert tr.deleted_rows == (2,)
    assert out.W0.shape[0] == 4
    assert tr.kept_rows == (0, 1, 3, 4)


def test_restricted_random(rng):
    for _ in range(20):
        A, _, _ = random_nonneg_product(rng, 6, 5, 3)
        out, tr = p1_to_restricted(nmf_to_p1(NmfInstance(A, 3)))
        np.testing.assert_allclose(out.W0[:, -1], 1.0, atol=1e-12)
        assert np.min(out.W0 @ out.H0) >= -1e-9
        assert np.all(tr.D_diag > 0)


def test_restricted_requires_ones_column():
    with pytest.raises(NotNormalized):
        RestrictedP1Instance(np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(2))


def test_restricted_solution_composes(rng):
    # with nonnegative W, H the identity solves the P1 instance, so
    # Qprime = Qhat^-1 solves the restricted one and maps back to the identity
    _, W, H = random_nonneg_product(rng, 5, 4, 3)
    restricted, tr = p1_to_restricted(P1Instance(W, H))
    Qprime = np.linalg.inv(tr.Qhat)
    assert np.min(restricted.W0 @ np.linalg.inv(Qprime)) >= -1e-12
    assert np.min(Qprime @ restricted.H0) >= -1e-12
    np.testing.assert_allclose(restricted_solution_to_p1(tr, Qprime), np.eye(3), atol=1e-12)
    with pytest.raises(NegativeEntries):
        restricted_solution_to_p1(tr, -Qprime)


def _lemma_restricted():
    inst, T0, T1 = lemma_gadget()
    W0 = np.column_stack([inst.S, np.ones(inst.m)])
    H0 = np.vstack([inst.P.A.T, -inst.P.b])
    return inst, T0, T1, RestrictedP1Instance(W0, H0)


def test_lemma_bijection():
    inst, T0, _, restricted = _lemma_restricted()
    back = restricted_to_simplex(restricted)
    np.testing.assert_array_equal(back.P.A, inst.P.A)
    np.testing.assert_array_equal(back.P.b, inst.P.b)
    np.testing.assert_array_equal(back.S, inst.S)
    fwd = simplex_to_restricted(inst)
    np.testing.assert_array_equal(fwd.W0, restricted.W0)
    np.testing.assert_array_equal(fwd.H0, restricted.H0)
    Q = simplex_solution_to_q(T0)
    assert np.min(restricted.W0 @ np.linalg.inv(Q)) >= -1e-12
    assert np.min(Q @ restricted.H0) >= -1e-12


def test_k1_has_no_simplex_instance():
    with pytest.raises(InvalidInstance):
        restricted_to_simplex(RestrictedP1Instance(np.ones((3, 1)), np.array([[1.0, 2.0]])))


def test_q_transport_examples():
    T = Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    Q = simplex_solution_to_q(T)
    np.testing.assert_array_equal(Q, [[0, 0, 1], [1, 0, 1], [0, 1, 1]])
    np.testing.assert_array_equal(q_to_simplex_solution(Q).vertices, T.vertices)
    with pytest.raises(NotNormalized):
        q_to_simplex_solution(2 * Q)
    with pytest.raises(DegenerateSimplex):
        simplex_solution_to_q(Simplex([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]))
    np.testing.assert_allclose(normalize_q(2 * Q), Q)
    with pytest.raises(NotNormalized):
        normalize_q(-Q)


def test_round_trip_bit_identical(rng):
    for _ in range(50):
        k = int(rng.integers(2, 5))
        A, _, _ = random_nonneg_product(rng, 7, 6, k)
        restricted, _ = p1_to_restricted(nmf_to_p1(NmfInstance(A, k)))
        again = simplex_to_restricted(restricted_to_simplex(restricted))
        assert np.array_equal(again.W0, restricted.W0) and np.array_equal(again.H0, restricted.H0)


def test_solution_transport_agrees(rng):
    inst, T0, T1, restricted = _lemma_restricted()
    for _ in range(50):
        T = Simplex(rng.uniform(-0.2, 1.2, size=(3, 2)))
        if T.is_degenerate():
            continue
        Q = simplex_solution_to_q(T)
        nonneg = (np.min(restricted.W0 @ np.linalg.inv(Q)) >= -1e-9 and np.min(Q @ restricted.H0) >= -1e-9)
        assert nonneg == verify_solution(inst, T, 1e-9).ok


def test_solve_rank_one():
    A = np.outer([1.0, 2.0, 0.0], [3.0, 1.0])
    out = solve_exact_nmf(NmfInstance(A, 1))
    assert out.solved and out.residual <= 1e-12
    assert np.all(out.factors.W >= 0) and np.all(out.factors.H >= 0)


def test_solve_rank_two(rng):
    for _ in range(20):
        A, _, _ = random_nonneg_product(rng, 6, 6, 2)
        out = solve_exact_nmf(NmfInstance(A, 2))
        assert out.solved and verify_factorization(A, out.factors)[0]


def test_solve_warm_started(rng):
    A, W, H = random_nonneg_product(rng, 5, 4, 3)
    state = PipelineState()
    out = solve_exact_nmf(NmfInstance(A, 3), warm_start=H, state=state)
    assert out.solved and out.search.sweeps == 0
    assert verify_factorization(A, out.factors)[0]
    assert state.simplex_instance.k == 3


def test_solve_restores_deleted_rows(rng):
    A, _, H = random_nonneg_product(rng, 4, 5, 3)
    A = np.vstack([np.zeros((1, 5)), A])
    out = solve_exact_nmf(NmfInstance(A, 3), warm_start=H)
    assert out.solved
    assert np.all(out.factors.W[0] == 0.0)


def test_row_scaling_invariance(rng):
    for _ in range(5):
        A, _, H = random_nonneg_product(rng, 5, 4, 3)
        B = A * np.array([[1.0], [3.0], [0.5], [1.0], [7.0]])
        a = solve_exact_nmf(NmfInstance(A, 3), warm_start=H)
        b = solve_exact_nmf(NmfInstance(B, 3), warm_start=H)
        assert a.solved == b.solved
        assert verify_factorization(B, b.factors)[0]


def test_verify_factorization():
    pair = FactorPair(np.eye(2), np.eye(2))
    assert verify_factorization(np.eye(2), pair)[0]
    ok, res, _ = verify_factorization(2 * np.eye(2), pair)
    assert not ok and res == 1.0
    ok, _, neg = verify_factorization(np.eye(2), FactorPair(-np.eye(2), -np.eye(2)))
    assert not ok and neg == -1.0
    with pytest.raises(ValueError):
        verify_factorization(np.eye(3), pair)
