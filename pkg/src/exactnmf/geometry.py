"""Polyhedra, simplices and the INTERMEDIATE SIMPLEX instance type."""
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateSimplex, InvalidInstance, Singular
from .numerics import DEFAULT_TOL, rank, scale_of, solve_linear


@dataclass(frozen=True)
class Polyhedron:
    """``{x : A @ x >= b}``."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).ravel()
        if A.ndim != 2 or A.shape[0] != b.size:
            raise ValueError(f"constraint matrix {A.shape} does not match rhs of length {b.size}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n_constraints(self):
        return self.A.shape[0]

    @property
    def dim(self):
        return self.A.shape[1]

    def violation(self, X):
        """``max(b - A x)`` for each row of ``X`` (or for a single point)."""
        X = np.asarray(X, dtype=float)
        return np.max(self.b - X @ self.A.T, axis=-1)


def point_in_polyhedron(P, x, tol=DEFAULT_TOL):
    """Return ``(inside, worst_violation)`` for a single point."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != P.dim:
        raise ValueError(f"point has dimension {x.size}, polyhedron {P.dim}")
    worst = float(P.violation(x))
    return worst <= tol, worst


@dataclass(frozen=True)
class Simplex:
    """A (k-1)-simplex in R^(k-1), stored as a k x (k-1) array of vertex rows."""

    vertices: np.ndarray

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] != V.shape[1] + 1:
            raise ValueError(f"a simplex in R^d needs d+1 vertices, got array of shape {V.shape}")
        V.setflags(write=False)
        object.__setattr__(self, "vertices", V)

    @property
    def k(self):
        return self.vertices.shape[0]

    @property
    def G(self):
        """Vertices as columns with an appended row of ones."""
        return np.vstack([self.vertices.T, np.ones(self.k)])

    def replace_vertex(self, i, v):
        V = self.vertices.copy()
        V[i] = v
        return Simplex(V)

    def is_degenerate(self, tol=DEFAULT_TOL):
        return rank(self.G, tol) < self.k


def barycentric(T, X, tol=DEFAULT_TOL):
    """Coefficients ``lam`` with ``G @ lam = [x; 1]``.

    ``X`` may be one point or an (m, k-1) array; the result has matching
    leading shape and ``k`` trailing entries.
    """
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X2 = X.reshape(1, -1) if single else X
    if X2.shape[1] != T.k - 1:
        raise ValueError(f"points have dimension {X2.shape[1]}, simplex {T.k - 1}")
    rhs = np.vstack([X2.T, np.ones(X2.shape[0])])
    try:
        lam = solve_linear(T.G, rhs, tol).T
    except Singular as exc:
        raise DegenerateSimplex(str(exc)) from None
    return lam[0] if single else lam


@dataclass(frozen=True)
class IntermediateSimplexInstance:
    """Polyhedron ``P = {x : A x >= b}`` in R^(k-1) and a point set ``S`` inside it."""

    P: Polyhedron
    S: np.ndarray

    def __post_init__(self):
        S = np.asarray(self.S, dtype=float)
        if S.ndim != 2 or S.shape[1] != self.P.dim:
            raise ValueError(f"points of shape {S.shape} do not live in R^{self.P.dim}")
        object.__setattr__(self, "S", S)

    @property
    def k(self):
        return self.P.dim + 1

    @property
    def dim(self):
        return self.P.dim

    @property
    def m(self):
        return self.S.shape[0]

    @property
    def n(self):
        return self.P.n_constraints

    def validate(self, tol=DEFAULT_TOL):
        """Raise :class:`InvalidInstance` unless every side-constraint holds."""
        if self.dim < 1:
            raise InvalidInstance("INTERMEDIATE SIMPLEX needs dimension k-1 >= 1")
        Ab = np.column_stack([self.P.A, self.P.b])
        r = rank(Ab, tol)
        if r != self.k:
            raise InvalidInstance(f"[A, b] has rank {r}, expected {self.k}")
        if self.m < 1:
            raise InvalidInstance("point set is empty")
        span = rank(self.S[1:] - self.S[0], tol) if self.m > 1 else 0
        if span != self.dim:
            raise InvalidInstance(f"points affinely span dimension {span}, expected {self.dim}")
        worst = float(np.max(self.P.violation(self.S)))
        if worst > tol * scale_of(Ab):
            raise InvalidInstance(f"a point of S violates P by {worst:.3g}")
        return self
