"""Two-phase primal simplex for small dense linear programs.

Problems are stated as::

    minimize    c @ x
    subject to  G @ x >= h
                E @ x == f
                x[j] >= 0   for j with nonneg[j]; other variables are free

Free variables are split into differences of nonnegatives and inequality
rows receive surplus variables, giving the canonical form ``A y = b, y >= 0``.
The solver is a revised simplex that refactors the basis from the original
data at every pivot, so no rounding error is carried between iterations.
Pricing is Dantzig's rule; after a run of degenerate pivots it falls back to
Bland's rule, which cannot cycle.
"""
from dataclasses import dataclass, field

import numpy as np

from scipy.linalg import lu_factor, lu_solve

from .exceptions import IterationLimit

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

# degenerate pivots in a row before switching to Bland's rule
_DEGENERATE_STREAK = 30
# smallest admissible pivot element (rows are equilibrated)
_PIVOT_TOL = 1e-9
# pivots smaller than this fraction of the direction's largest entry are refused
_PIVOT_REL = 1e-7
# equilibration sweeps before solving
_SCALE_PASSES = 4


@dataclass(frozen=True)
class LPProblem:
    c: np.ndarray
    G: np.ndarray = None
    h: np.ndarray = None
    E: np.ndarray = None
    f: np.ndarray = None
    nonneg: np.ndarray = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        d = c.size
        object.__setattr__(self, "c", c)
        for M, v, name in (("G", "h", "inequality"), ("E", "f", "equality")):
            A = getattr(self, M)
            b = getattr(self, v)
            A = np.zeros((0, d)) if A is None else np.asarray(A, dtype=float).reshape(-1, d)
            b = np.zeros(0) if b is None else np.asarray(b, dtype=float).ravel()
            if A.shape[0] != b.size:
                raise ValueError(f"{name} block has {A.shape[0]} rows but {b.size} right-hand sides")
            if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
                raise ValueError(f"{name} block contains non-finite entries")
            object.__setattr__(self, M, A)
            object.__setattr__(self, v, b)
        nonneg = np.zeros(d, dtype=bool) if self.nonneg is None else np.asarray(self.nonneg, dtype=bool)
        if nonneg.shape != (d,):
            raise ValueError("nonneg mask must have one entry per variable")
        object.__setattr__(self, "nonneg", nonneg)

    @property
    def n_vars(self):
        return self.c.size

    def max_violation(self, x):
        """Largest constraint violation of ``x`` (0 when feasible)."""
        worst = 0.0
        if self.G.shape[0]:
            worst = max(worst, float(np.max(self.h - self.G @ x)))
        if self.E.shape[0]:
            worst = max(worst, float(np.max(np.abs(self.E @ x - self.f))))
        if self.nonneg.any():
            worst = max(worst, float(np.max(-x[self.nonneg])))
        return worst


@dataclass
class LPResult:
    status: str
    x: np.ndarray = None
    value: float = None
    # ray of improvement when unbounded; Farkas multipliers of the
    # canonical rows when infeasible
    certificate: np.ndarray = None
    iterations: int = 0
    max_violation: float = field(default=0.0)

    @property
    def optimal(self):
        return self.status == OPTIMAL


class _Revised:
    """Revised simplex over ``A y = b, y >= 0`` with a maintained basis."""

    def __init__(self, A, b, basis, max_iter, opt_tol, feas_tol):
        self.A = A
        self.b = b
        self.basis = list(basis)
        self.max_iter = max_iter
        self.opt_tol = opt_tol
        self.feas_tol = feas_tol
        self.iterations = 0
        self.factor()

    def factor(self):
        self.lu = lu_factor(self.A[:, self.basis], check_finite=False)
        self.xb = lu_solve(self.lu, self.b, check_finite=False)

    def duals(self, cost):
        return lu_solve(self.lu, cost[self.basis], trans=1, check_finite=False)

    def reduced_costs(self, cost):
        return cost - self.A.T @ self.duals(cost)

    def direction(self, j):
        return lu_solve(self.lu, self.A[:, j], check_finite=False)

    def _leaving(self, d, bland, forced):
        """Row leaving the basis when moving along ``d``, or None for a ray."""
        if forced.size:
            hit = forced[np.abs(d[forced]) > _PIVOT_TOL]
            if hit.size:
                return int(hit[np.argmax(np.abs(d[hit]))]), 0.0
        rows = np.flatnonzero(d > max(_PIVOT_TOL, _PIVOT_REL * np.max(np.abs(d))))
        if rows.size == 0:
            return None, 0.0
        x = np.maximum(self.xb[rows], 0.0)
        ratios = x / d[rows]
        if bland:
            best = np.min(ratios)
            ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
            return int(min(ties, key=lambda i: self.basis[i])), float(best)
        # Harris: bound the step with relaxed ratios, then take the largest pivot
        theta = np.min((x + self.feas_tol) / d[rows])
        ok = np.flatnonzero(ratios <= theta)
        pick = ok[np.argmax(d[rows][ok])]
        return int(rows[pick]), float(ratios[pick])

    def run(self, cost, allowed, pinned=()):
        """Minimise ``cost`` over entering columns in ``allowed``.

        Basic columns listed in ``pinned`` must stay at zero; they leave the
        basis as soon as an entering column touches their row.  Returns the
        entering column of an unbounded ray, or None at optimality.
        """
        pinned = set(pinned)
        streak = 0
        bland = False
        while True:
            rc = np.where(allowed, self.reduced_costs(cost), 0.0)
            rc[self.basis] = 0.0
            candidates = np.flatnonzero(rc < -self.opt_tol)
            if candidates.size == 0:
                return None
            j = int(candidates[0]) if bland else int(candidates[np.argmin(rc[candidates])])
            d = self.direction(j)
            forced = np.array([r for r, c in enumerate(self.basis) if c in pinned], dtype=int)
            r, step = self._leaving(d, bland, forced)
            if r is None:
                return j
            if self.iterations >= self.max_iter:
                raise IterationLimit(f"simplex exceeded {self.max_iter} pivots")
            if step <= 1e-12:
                streak += 1
                bland = bland or streak >= _DEGENERATE_STREAK
            else:
                streak = 0
                bland = False
            self.basis[r] = j
            self.iterations += 1
            self.factor()


def lp_solve(problem, feas_tol=1e-9, opt_tol=1e-9, max_iter=10_000):
    """Solve ``problem`` and return an :class:`LPResult`.

    Raises :class:`IterationLimit` when more than ``max_iter`` pivots are needed.
    """
    p = problem
    d = p.n_vars
    free = np.flatnonzero(~p.nonneg)
    n_split = d + free.size
    n_ineq = p.G.shape[0]
    n_eq = p.E.shape[0]
    m = n_ineq + n_eq
    N = n_split + n_ineq

    # canonical form: columns [x (with free vars as +part), -part of free vars, surplus]
    A = np.zeros((m, N))
    A[:n_ineq, :d] = p.G
    A[n_ineq:, :d] = p.E
    A[:, d:n_split] = -A[:, free]
    A[:n_ineq, n_split:] = -np.eye(n_ineq)
    b = np.concatenate([p.h, p.f])
    cost = np.zeros(N)
    cost[:d] = p.c
    cost[d:n_split] = -p.c[free]

    # row equilibration and nonnegative right-hand sides
    row_scale = np.maximum(np.max(np.abs(A), axis=1, initial=0.0), np.abs(b))
    row_scale[row_scale == 0.0] = 1.0
    sign = np.where(b < 0, -1.0, 1.0)
    A *= (sign / row_scale)[:, None]
    b = b * sign / row_scale

    def to_x(v):
        x = v[:d].copy()
        x[free] -= v[d:n_split]
        return x

    if m == 0:
        if np.any(cost < 0):
            ray = np.zeros(N)
            ray[int(np.argmin(cost))] = 1.0
            return LPResult(UNBOUNDED, certificate=to_x(ray))
        x = np.zeros(d)
        return LPResult(OPTIMAL, x=x, value=0.0, max_violation=0.0)

    # rows whose surplus column became +1 can start with it in the basis
    basis = [-1] * m
    for r in range(n_ineq):
        if sign[r] < 0:
            basis[r] = n_split + r
    need_art = [r for r in range(m) if basis[r] < 0]
    n_art = len(need_art)
    A_full = np.hstack([A, np.zeros((m, n_art))])
    for a, r in enumerate(need_art):
        A_full[r, N + a] = 1.0
        basis[r] = N + a
    artificial = range(N, N + n_art)

    lp = _Revised(A_full, b, basis, max_iter, opt_tol, feas_tol)
    phase1 = np.zeros(N + n_art)
    phase1[N:] = 1.0
    lp.run(phase1, np.ones(N + n_art, dtype=bool))

    infeasibility = float(phase1[lp.basis] @ lp.xb)
    if infeasibility > feas_tol * max(1.0, float(np.max(b, initial=0.0))):
        # phase-1 duals: A^T y <= 0 on the canonical columns and b @ y > 0
        y = lp.duals(phase1)
        y = y * sign / row_scale
        return LPResult(INFEASIBLE, certificate=y, iterations=lp.iterations)

    # swap zero-level artificials out where the row allows it
    for r in range(m):
        if lp.basis[r] >= N:
            row = lu_solve(lp.lu, np.eye(m)[r], trans=1, check_finite=False) @ A_full[:, :N]
            nz = np.flatnonzero(np.abs(row) > 1e-7)
            if nz.size:
                lp.basis[r] = int(nz[np.argmax(np.abs(row[nz]))])
                lp.factor()

    phase2 = np.zeros(N + n_art)
    phase2[:N] = cost
    allowed = np.zeros(N + n_art, dtype=bool)
    allowed[:N] = True
    ray_col = lp.run(phase2, allowed, pinned=artificial)

    if ray_col is not None:
        dy = np.zeros(N + n_art)
        dy[ray_col] = 1.0
        dy[lp.basis] -= lp.direction(ray_col)
        return LPResult(UNBOUNDED, certificate=to_x(dy[:N]), iterations=lp.iterations)

    y = np.zeros(N + n_art)
    y[lp.basis] = np.maximum(lp.xb, 0.0)
    x = to_x(y[:N])
    return LPResult(OPTIMAL, x=x, value=float(p.c @ x), iterations=lp.iterations,
                    max_violation=p.max_violation(x))
