"""Dense real matrices with tolerance-aware Gaussian elimination.

Matrices are plain 2-D ``float64`` numpy arrays.  Every comparison against
zero uses a hybrid threshold ``tol * scale`` where ``scale`` is the largest
absolute entry of the operand (or 1, whichever is larger).
"""
import numpy as np

from .exceptions import RankMismatch, Singular, ZeroVector

DEFAULT_TOL = 1e-9


def as_matrix(M, name="matrix"):
    """Return ``M`` as a finite, nonempty 2-D float array (copy-free when possible)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    if M.shape[0] == 0 or M.shape[1] == 0:
        raise ValueError(f"{name} must be nonempty, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def scale_of(*arrays):
    """Largest absolute entry over ``arrays``, floored at 1."""
    s = 1.0
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if a.size:
            s = max(s, float(np.max(np.abs(a))))
    return s


def _eliminate(M, tol):
    """Row-echelon reduction with partial pivoting.

    Returns ``(L, U, perm, pivot_cols)`` with ``M[perm] ~= L @ U`` where ``L``
    is unit lower trapezoidal (m x r) and ``U`` holds the r echelon rows.
    """
    U = np.array(M, dtype=float)
    m, n = U.shape
    thresh = tol * scale_of(U)
    L = np.zeros((m, min(m, n)))
    perm = np.arange(m)
    pivot_cols = []
    r = 0
    for j in range(n):
        if r == m:
            break
        p = r + int(np.argmax(np.abs(U[r:, j])))
        if abs(U[p, j]) <= thresh:
            continue
        if p != r:
            U[[r, p]] = U[[p, r]]
            L[[r, p], :r] = L[[p, r], :r]
            perm[[r, p]] = perm[[p, r]]
        L[r, r] = 1.0
        mult = U[r + 1:, j] / U[r, j]
        L[r + 1:, r] = mult
        U[r + 1:] -= np.outer(mult, U[r])
        U[r + 1:, j] = 0.0
        pivot_cols.append(j)
        r += 1
    return L[:, :r], U[:r], perm, pivot_cols


def rank(M, tol=DEFAULT_TOL):
    """Number of pivots found by row-echelon reduction."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    return len(_eliminate(M, tol)[3])


def rank_factor(A, k, tol=DEFAULT_TOL):
    """Factor ``A = W0 @ H0`` with ``W0`` (m x k) and ``H0`` (k x n) of full rank.

    ``H0`` is the nonzero part of the row-echelon form and ``W0`` the
    (row-permuted) elimination multipliers.  Signs are unconstrained.
    """
    A = as_matrix(A, "A")
    L, U, perm, pivots = _eliminate(A, tol)
    if len(pivots) != k:
        raise RankMismatch(f"matrix has numerical rank {len(pivots)}, expected {k}")
    W0 = np.empty_like(L)
    W0[perm] = L
    return W0, U


def _gauss_jordan(M, rhs, tol):
    M = as_matrix(M, "M")
    k = M.shape[0]
    if M.shape[1] != k:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    thresh = tol * scale_of(M)
    aug = np.hstack([M, rhs])
    for j in range(k):
        p = j + int(np.argmax(np.abs(aug[j:, j])))
        if abs(aug[p, j]) <= thresh:
            raise Singular(f"zero pivot in column {j}")
        if p != j:
            aug[[j, p]] = aug[[p, j]]
        aug[j] /= aug[j, j]
        col = aug[:, j].copy()
        col[j] = 0.0
        aug -= np.outer(col, aug[j])
    return aug[:, k:]


def invert(Q, tol=DEFAULT_TOL):
    Q = as_matrix(Q, "Q")
    return _gauss_jordan(Q, np.eye(Q.shape[0]), tol)


def solve_linear(M, rhs, tol=DEFAULT_TOL):
    """Solve ``M @ x = rhs``; ``rhs`` may be a vector or a matrix of columns."""
    rhs = np.asarray(rhs, dtype=float)
    vector = rhs.ndim == 1
    out = _gauss_jordan(M, rhs.reshape(len(rhs), -1), tol)
    return out[:, 0] if vector else out


def complete_to_basis(v):
    """Nonsingular matrix whose last column is ``v``.

    The remaining columns are the standard basis vectors other than the one
    at the largest-magnitude entry of ``v`` (the elimination pivot), so the
    determinant is ``+-v[p]``.  ``e_k`` completes to the identity.
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0 or not np.any(v):
        raise ZeroVector("cannot complete the zero vector to a basis")
    k = v.size
    p = int(np.argmax(np.abs(v)))
    B = np.zeros((k, k))
    others = [i for i in range(k) if i != p]
    for c, i in enumerate(others):
        B[i, c] = 1.0
    B[:, -1] = v
    return B
