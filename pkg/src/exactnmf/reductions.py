"""From exact NMF to INTERMEDIATE SIMPLEX and back.

The chain is::

    NmfInstance --nmf_to_p1--> P1Instance --p1_to_restricted--> RestrictedP1Instance
        <--restricted_to_simplex / simplex_to_restricted--> IntermediateSimplexInstance

Every forward step has a companion that transports a solution back, so a
simplex ``T`` with ``S in T in P`` turns into nonnegative factors ``W, H``
with ``A = W H``.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateRow,
    DegenerateSimplex,
    InvalidInstance,
    NegativeEntries,
    NotNormalized,
    RankMismatch,
    Singular,
)
from .geometry import IntermediateSimplexInstance, Polyhedron, Simplex
from .numerics import DEFAULT_TOL, as_matrix, complete_to_basis, invert, rank, rank_factor, scale_of, solve_linear
from .simplex_search import SearchConfig, local_search

logger = logging.getLogger(__name__)


def _check_nonnegative(X, name, tol):
    """Raise :class:`NegativeEntries` if ``X`` has an entry below ``-tol * scale``."""
    if X.size == 0:
        return
    idx = np.unravel_index(int(np.argmin(X)), X.shape)
    worst = float(X[idx])
    if worst < -tol * scale_of(X):
        raise NegativeEntries(f"{name}[{idx[0]}, {idx[1]}] = {worst:.3g} is negative",
                              where=(name, int(idx[0]), int(idx[1])), value=worst)


@dataclass(frozen=True)
class NmfInstance:
    """Nonnegative ``A`` of rank exactly ``k``.  Entries down to ``-tol`` are clamped to 0."""

    A: np.ndarray
    k: int
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        A = np.array(as_matrix(self.A, "A"), dtype=float)
        _check_nonnegative(A, "A", self.tol)
        A[A < 0] = 0.0
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        k = int(self.k)
        if k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        r = rank(A, self.tol)
        if r != k:
            raise RankMismatch(f"matrix has numerical rank {r}, expected {k}")
        object.__setattr__(self, "k", k)

    @property
    def shape(self):
        return self.A.shape


@dataclass(frozen=True)
class FactorPair:
    W: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        W = as_matrix(self.W, "W")
        H = as_matrix(self.H, "H")
        if W.shape[1] != H.shape[0]:
            raise ValueError(f"W is {W.shape} but H is {H.shape}")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "H", H)

    @property
    def k(self):
        return self.W.shape[1]

    def product(self):
        return self.W @ self.H

    def residual(self, A):
        """``max |A - W H|``."""
        return float(np.max(np.abs(np.asarray(A, dtype=float) - self.product())))

    def check(self, A, tol=DEFAULT_TOL):
        """Raise unless both factors are nonnegative and reproduce ``A`` within ``tol * max|A|``."""
        _check_nonnegative(self.W, "W", tol)
        _check_nonnegative(self.H, "H", tol)
        res = self.residual(A)
        if res > tol * scale_of(A):
            raise NegativeEntries(f"reconstruction error {res:.3g} exceeds tolerance", value=res)
        return self


@dataclass(frozen=True)
class P1Instance:
    """Full-rank ``W0`` (m x k), ``H0`` (k x n) with ``W0 H0 >= 0``; signs of the factors are free."""

    W0: np.ndarray
    H0: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        W0 = as_matrix(self.W0, "W0")
        H0 = as_matrix(self.H0, "H0")
        k = W0.shape[1]
        if H0.shape[0] != k:
            raise ValueError(f"W0 is {W0.shape} but H0 is {H0.shape}")
        for M, name in ((W0, "W0"), (H0, "H0")):
            r = rank(M, self.tol)
            if r != k:
                raise RankMismatch(f"{name} has rank {r}, expected {k}")
        _check_nonnegative(W0 @ H0, "W0 H0", self.tol)
        object.__setattr__(self, "W0", W0)
        object.__setattr__(self, "H0", H0)

    @property
    def k(self):
        return self.W0.shape[1]


@dataclass(frozen=True)
class RestrictedP1Instance(P1Instance):
    """A :class:`P1Instance` whose ``W0`` ends in a column of ones."""

    def __post_init__(self):
        super().__post_init__()
        last = self.W0[:, -1]
        if np.max(np.abs(last - 1.0)) > self.tol:
            raise NotNormalized("last column of W0 is not all ones")


@dataclass(frozen=True)
class ReductionTranscript:
    """What :func:`p1_to_restricted` did, enough to map a solution back."""

    deleted_rows: tuple
    Qhat: np.ndarray
    D_diag: np.ndarray
    original_instance: P1Instance

    @property
    def kept_rows(self):
        m = self.original_instance.W0.shape[0]
        return tuple(i for i in range(m) if i not in set(self.deleted_rows))


def nmf_to_p1(inst, tol=DEFAULT_TOL):
    W0, H0 = rank_factor(inst.A, inst.k, tol)
    return P1Instance(W0, H0, tol)


def p1_solution_to_nmf(inst, Q, tol=DEFAULT_TOL):
    """``(W0 Q^-1, Q H0)``; raises :class:`NegativeEntries` if ``Q`` is not a solution."""
    Q = as_matrix(Q, "Q")
    Qinv = invert(Q, tol)
    W = inst.W0 @ Qinv
    H = Q @ inst.H0
    _check_nonnegative(W, "W", tol)
    _check_nonnegative(H, "H", tol)
    return FactorPair(W, H)


def p1_to_restricted(inst, tol=DEFAULT_TOL):
    W0, H0 = inst.W0, inst.H0
    row_max = np.max(np.abs(W0), axis=1)
    zero = row_max <= tol * scale_of(W0)
    deleted = tuple(int(i) for i in np.flatnonzero(zero))
    W = W0[~zero]
    if W.shape[0] == 0:
        raise DegenerateRow("every row of W0 is zero")
    Qhat_inv = complete_to_basis(H0.sum(axis=1))
    Qhat = invert(Qhat_inv, tol)
    W1 = W @ Qhat_inv
    H1 = Qhat @ H0
    # last column of W1 holds the row sums of A, positive for every kept row
    last = W1[:, -1]
    bad = np.flatnonzero(last <= tol * scale_of(W1))
    if bad.size:
        raise DegenerateRow(f"row {int(np.flatnonzero(~zero)[bad[0]])} has nonpositive row sum {last[bad[0]]:.3g}")
    D = 1.0 / last
    W2 = W1 * D[:, None]
    W2[:, -1] = 1.0
    restricted = RestrictedP1Instance(W2, H1, inst.tol)
    return restricted, ReductionTranscript(deleted, Qhat, D, inst)


def restricted_solution_to_p1(transcript, Qprime, tol=DEFAULT_TOL):
    """``Q = Q' Qhat``, checked against the original instance."""
    Q = as_matrix(Qprime, "Qprime") @ transcript.Qhat
    p1_solution_to_nmf(transcript.original_instance, Q, tol)
    return Q


def restricted_to_simplex(inst):
    k = inst.k
    if k < 2:
        raise InvalidInstance("INTERMEDIATE SIMPLEX is undefined for k = 1")
    H0 = inst.H0
    P = Polyhedron(H0[: k - 1].T.copy(), -H0[k - 1])
    return IntermediateSimplexInstance(P, inst.W0[:, : k - 1].copy())


def simplex_to_restricted(inst, tol=DEFAULT_TOL):
    W0 = np.column_stack([inst.S, np.ones(inst.m)])
    H0 = np.vstack([inst.P.A.T, -inst.P.b])
    return RestrictedP1Instance(W0, H0, tol)


def simplex_solution_to_q(T, tol=DEFAULT_TOL):
    if T.is_degenerate(tol):
        raise DegenerateSimplex("simplex vertices are affinely dependent")
    return T.G.T


def q_to_simplex_solution(Q, tol=DEFAULT_TOL):
    Q = as_matrix(Q, "Q")
    if Q.shape[0] != Q.shape[1] or Q.shape[0] < 2:
        raise ValueError(f"expected a square matrix of size at least 2, got {Q.shape}")
    if np.max(np.abs(Q[:, -1] - 1.0)) > tol:
        raise NotNormalized("last column of Q is not all ones")
    T = Simplex(Q[:, :-1])
    if T.is_degenerate(tol):
        raise DegenerateSimplex("Q is singular")
    return T


def normalize_q(Q, tol=DEFAULT_TOL):
    """Scale the rows of ``Q`` so its last column is all ones.

    Row scaling maps a solution to a solution, so only the sign matters;
    a last-column entry at or below ``tol`` raises :class:`NotNormalized`.
    """
    Q = as_matrix(Q, "Q")
    last = Q[:, -1]
    if np.any(last <= tol * scale_of(Q)):
        raise NotNormalized("a row of Q has nonpositive last entry")
    out = Q / last[:, None]
    out[:, -1] = 1.0
    return out


def _normalize_rows(inst):
    """Same polyhedron with each constraint scaled to unit largest entry."""
    A, b = inst.P.A, inst.P.b
    s = np.maximum(np.max(np.abs(A), axis=1), np.abs(b))
    s[s == 0.0] = 1.0
    return IntermediateSimplexInstance(Polyhedron(A / s[:, None], b / s), inst.S)


def _polish(W, H):
    """Clip rounding negatives and balance column/row magnitudes."""
    W = np.maximum(W, 0.0)
    H = np.maximum(H, 0.0)
    wmax = np.max(W, axis=0)
    hmax = np.max(H, axis=1)
    ok = (wmax > 0) & (hmax > 0)
    s = np.ones_like(wmax)
    s[ok] = np.sqrt(hmax[ok] / wmax[ok])
    return W * s[None, :], H / s[:, None]


@dataclass
class Factorization:
    factors: FactorPair
    residual: float
    search: object = None

    solved = True


@dataclass
class NoSolutionFound:
    """The local search stalled; this is not a proof that no factorization exists."""

    infeasibility: np.ndarray
    search: object = None
    reason: str = ""

    solved = False


@dataclass
class PipelineState:
    """Intermediate objects of :func:`solve_exact_nmf`, exposed for inspection."""

    p1: P1Instance = None
    restricted: RestrictedP1Instance = None
    transcript: ReductionTranscript = None
    simplex_instance: IntermediateSimplexInstance = None
    extra: dict = field(default_factory=dict)


def warm_start_simplex(state, H, tol=DEFAULT_TOL):
    """Starting simplex from a candidate right factor ``H`` (k x n, nonnegative rows).

    ``Q`` solves ``Q H0 = H`` in the least-squares sense and is carried to
    the restricted instance and normalized.
    """
    H = as_matrix(H, "H")
    H0 = state.p1.H0
    if H.shape != H0.shape:
        raise ValueError(f"warm-start H has shape {H.shape}, expected {H0.shape}")
    Q = solve_linear(H0 @ H0.T, H0 @ H.T, tol).T
    Qprime = Q @ complete_to_basis(H0.sum(axis=1))
    return q_to_simplex_solution(normalize_q(Qprime, tol), tol)


def _rank_one(inst):
    A = inst.A
    r, j = np.unravel_index(int(np.argmax(A)), A.shape)
    W = A[:, [j]].copy()
    H = A[[r], :] / A[r, j]
    return W, H


def solve_exact_nmf(inst, config=None, warm_start=None, tol=DEFAULT_TOL, state=None):
    """Nonnegative ``W, H`` with ``A = W H``, or :class:`NoSolutionFound` on a stall.

    ``warm_start`` is an optional k x n right factor used to seed the search.
    A :class:`PipelineState` passed as ``state`` is filled in along the way.
    """
    cfg = config or SearchConfig(tol=tol)
    state = state if state is not None else PipelineState()
    A = inst.A
    if inst.k == 1:
        W, H = _rank_one(inst)
        pair = FactorPair(*_polish(W, H))
        return Factorization(pair, pair.residual(A))

    state.p1 = nmf_to_p1(inst, tol)
    state.restricted, state.transcript = p1_to_restricted(state.p1, tol)
    sinst = _normalize_rows(restricted_to_simplex(state.restricted))
    sinst.validate(max(tol, 1e-9))
    state.simplex_instance = sinst

    initial = None
    if warm_start is not None:
        try:
            initial = warm_start_simplex(state, warm_start, tol)
        except (NotNormalized, Singular, DegenerateSimplex) as exc:
            logger.info("ignoring warm start: %s", exc)
    result = local_search(sinst, cfg, initial=initial)
    if not result.solved:
        return NoSolutionFound(result.infeasibility, result, "local search stalled")

    Qprime = simplex_solution_to_q(result.simplex, tol)
    Q = Qprime @ state.transcript.Qhat
    p1 = state.p1
    try:
        Qinv = invert(Q, tol)
    except Singular as exc:
        return NoSolutionFound(result.infeasibility, result, str(exc))
    W = p1.W0 @ Qinv
    W[list(state.transcript.deleted_rows)] = 0.0
    H = Q @ p1.H0
    # the search tolerance bounds how negative an entry may come out
    slack = max(tol, cfg.infeasibility_tol) * 10
    try:
        _check_nonnegative(W, "W", slack)
        _check_nonnegative(H, "H", slack)
    except NegativeEntries as exc:
        return NoSolutionFound(result.infeasibility, result, str(exc))
    pair = FactorPair(*_polish(W, H))
    res = pair.residual(A)
    if res > _reconstruction_tol(tol) * scale_of(A):
        return NoSolutionFound(result.infeasibility, result, f"reconstruction error {res:.3g}")
    return Factorization(pair, res, result)


def _reconstruction_tol(tol):
    return max(tol, 1e-8)


def verify_factorization(A, pair, tol=DEFAULT_TOL):
    """``(ok, residual, worst_negative)`` for a candidate factorization."""
    A = np.asarray(A, dtype=float)
    if pair.W.shape[0] != A.shape[0] or pair.H.shape[1] != A.shape[1]:
        raise ValueError(f"factors {pair.W.shape} x {pair.H.shape} do not match A {A.shape}")
    res = pair.residual(A)
    neg = float(min(np.min(pair.W), np.min(pair.H), 0.0))
    ok = res <= _reconstruction_tol(tol) * scale_of(A) and neg >= -tol * scale_of(pair.W, pair.H)
    return ok, res, neg


__all__ = [
    "NmfInstance", "FactorPair", "P1Instance", "RestrictedP1Instance", "ReductionTranscript",
    "nmf_to_p1", "p1_solution_to_nmf", "p1_to_restricted", "restricted_solution_to_p1",
    "restricted_to_simplex", "simplex_to_restricted", "simplex_solution_to_q",
    "q_to_simplex_solution", "normalize_q", "warm_start_simplex", "solve_exact_nmf",
    "verify_factorization", "Factorization", "NoSolutionFound", "PipelineState",
]
