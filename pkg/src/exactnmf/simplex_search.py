"""Solvers for INTERMEDIATE SIMPLEX.

Given all vertices of a candidate simplex but one, the positions of the
last vertex that keep ``S`` covered and the vertex inside ``P`` form a
polyhedron described by linear equalities and inequalities in the vertex
coordinates plus, for every point ``s`` of ``S``, auxiliary multipliers
``alpha`` (one per fixed vertex) and ``alpha_star`` with::

    sum_i alpha_i v_i + v_last = alpha_star * s
    sum_i alpha_i + 1          = alpha_star
    alpha >= 0, alpha_star >= 0

The local search moves one vertex at a time to the position minimizing its
largest violation of ``P`` subject to those coverage constraints.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    CoverageInfeasible,
    DegenerateSimplex,
    DegenerateSpan,
    EmptyPolyhedron,
    InvalidInstance,
)
from .geometry import Simplex, barycentric
from .linprog import LPProblem, lp_solve
from .numerics import DEFAULT_TOL, rank

logger = logging.getLogger(__name__)

SOLVED = "solved"
STALLED = "stalled"


@dataclass(frozen=True)
class SearchConfig:
    max_sweeps: int = 200
    infeasibility_tol: float = 1e-8
    stall_sweeps: int = 5
    init_margin: float = 2.0
    restarts: int = 3
    rng_seed: int = 0
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        for name in ("max_sweeps", "stall_sweeps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.infeasibility_tol <= 0 or self.init_margin <= 0 or self.tol < 0:
            raise ValueError("tolerances and margin must be positive")
        if self.restarts < 0:
            raise ValueError("restarts must be nonnegative")


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    worst_S_violation: float
    worst_P_violation: float
    worst_S_index: int
    worst_P_index: int


@dataclass
class SearchResult:
    status: str
    simplex: Simplex
    infeasibility: np.ndarray
    sweeps: int = 0
    restarts: int = 0
    history: list = field(default_factory=list)

    @property
    def solved(self):
        return self.status == SOLVED


def verify_solution(inst, T, tol=DEFAULT_TOL):
    """Check ``S`` inside ``T`` (barycentric >= -tol) and ``T`` inside ``P``."""
    if T.k != inst.k:
        raise ValueError(f"simplex has {T.k} vertices, instance needs {inst.k}")
    lam = barycentric(T, inst.S, tol)
    s_viol = -np.min(lam, axis=1)
    p_viol = inst.P.violation(T.vertices)
    i_s = int(np.argmax(s_viol))
    i_p = int(np.argmax(p_viol))
    ws, wp = float(s_viol[i_s]), float(p_viol[i_p])
    return VerifyReport(ws <= tol and wp <= tol, ws, wp, i_s, i_p)


def vertex_infeasibility(inst, T):
    return np.maximum(inst.P.violation(T.vertices), 0.0)


def solve_rank2(inst):
    """Interval solution of a one-dimensional instance: ``T = P`` clamped to ``S``."""
    if inst.dim != 1:
        raise InvalidInstance(f"solve_rank2 needs a 1-dimensional instance, got {inst.dim}")
    a = inst.P.A[:, 0]
    b = inst.P.b
    lo, hi = -np.inf, np.inf
    if np.any((a == 0) & (b > 0)):
        raise EmptyPolyhedron("constraint 0 >= b with b > 0")
    pos, neg = a > 0, a < 0
    if pos.any():
        lo = float(np.max(b[pos] / a[pos]))
    if neg.any():
        hi = float(np.min(b[neg] / a[neg]))
    if lo > hi:
        raise EmptyPolyhedron(f"interval [{lo}, {hi}] is empty")
    s = inst.S[:, 0]
    if not np.isfinite(lo):
        lo = float(np.min(s))
    if not np.isfinite(hi):
        hi = float(np.max(s))
    return Simplex(np.array([[lo], [hi]]))


def initial_simplex(S, margin=2.0, rotation=None, tol=DEFAULT_TOL):
    """A simplex strictly containing every point of ``S``.

    Corner ``v0 = l - delta`` below the bounding box ``[l, u]`` with
    ``delta = margin * (diag + 1)``, then ``v0 + M e_i`` with
    ``M = d * max(u - v0) + delta``.  With an orthogonal ``rotation`` the
    construction happens in rotated coordinates and is mapped back.
    """
    S = np.asarray(S, dtype=float)
    d = S.shape[1]
    if S.shape[0] < d + 1 or rank(S[1:] - S[0], tol) < d:
        raise DegenerateSpan("points do not affinely span the space")
    X = S if rotation is None else S @ rotation
    lo, hi = X.min(axis=0), X.max(axis=0)
    delta = margin * (float(np.linalg.norm(hi - lo)) + 1.0)
    v0 = lo - delta
    M = d * float(np.max(hi - v0)) + delta
    V = np.vstack([v0, v0 + M * np.eye(d)])
    if rotation is not None:
        V = V @ rotation.T
    return Simplex(V)


@dataclass(frozen=True)
class VertexFeasibleRegion:
    """Linear system for the free vertex and per-point multipliers.

    Variable order: ``v`` (d entries), then for each point ``j`` its ``d``
    ``alpha`` multipliers followed by ``alpha_star``.  Points already in the
    hull of the fixed vertices get the vacuous block ``alpha = 0,
    alpha_star = 0`` so that the row counts do not depend on the data.
    """

    dim: int
    n_points: int
    n_facets: int
    E: np.ndarray
    f: np.ndarray
    G: np.ndarray
    h: np.ndarray
    vacuous: np.ndarray

    @property
    def n_vars(self):
        return self.E.shape[1]

    @property
    def n_equalities(self):
        return self.E.shape[0]

    @property
    def n_inequalities(self):
        return self.G.shape[0]

    def to_lp(self, relax=False):
        """LP over this region; with ``relax`` an extra slack ``t`` is added to the
        ``P`` rows and the objective minimizes it."""
        d, nf = self.dim, self.n_facets
        # rows after the P block are sign constraints on single variables
        bounds = self.G[nf:]
        nonneg = np.zeros(self.n_vars, dtype=bool)
        nonneg[np.argmax(bounds, axis=1)] = True
        G = self.G[:nf]
        h = self.h[:nf]
        E, f = self.E, self.f
        c = np.zeros(self.n_vars)
        if relax:
            G = np.hstack([G, np.ones((nf, 1))])
            E = np.hstack([E, np.zeros((E.shape[0], 1))])
            c = np.append(c, 1.0)
            nonneg = np.append(nonneg, True)
        return LPProblem(c=c, G=G, h=h, E=E, f=f, nonneg=nonneg)

    def vertex_of(self, z):
        return np.asarray(z)[: self.dim]

    def contains(self, v, tol=DEFAULT_TOL):
        """Whether some multipliers make position ``v`` feasible."""
        lp = self.to_lp()
        d = self.dim
        pin = np.zeros((d, lp.n_vars))
        pin[:, :d] = np.eye(d)
        lp = LPProblem(c=lp.c, G=lp.G, h=lp.h - tol, E=np.vstack([lp.E, pin]),
                       f=np.concatenate([lp.f, v]), nonneg=lp.nonneg)
        return lp_solve(lp).optimal


def _in_hull(F, x, tol):
    """Whether ``x`` is a convex combination of the rows of ``F``."""
    M = np.vstack([F.T, np.ones(F.shape[0])])
    rhs = np.append(x, 1.0)
    mu = np.linalg.lstsq(M, rhs, rcond=None)[0]
    resid = float(np.max(np.abs(M @ mu - rhs)))
    return resid <= tol * max(1.0, float(np.max(np.abs(rhs)))) and float(np.min(mu)) >= -tol


def feasible_region_last_vertex(inst, fixed, tol=DEFAULT_TOL):
    """Region of positions for the remaining vertex given the ``k-1`` fixed ones.

    Emits ``m*k`` equalities and ``n + m*k`` inequalities.
    """
    F = np.asarray(fixed, dtype=float)
    d = inst.dim
    if F.shape != (d, d):
        raise ValueError(f"expected {d} fixed vertices in R^{d}, got shape {F.shape}")
    if d > 1 and rank(F[1:] - F[0], tol) < d - 1:
        raise DegenerateSimplex("fixed vertices are affinely dependent")
    m, n, k = inst.m, inst.n, inst.k
    nvars = d + m * k
    E = np.zeros((m * k, nvars))
    f = np.zeros(m * k)
    G = np.zeros((n + m * k, nvars))
    h = np.zeros(n + m * k)
    G[:n, :d] = inst.P.A
    h[:n] = inst.P.b
    vacuous = np.zeros(m, dtype=bool)
    for j, s in enumerate(inst.S):
        col = d + j * k  # alpha block; alpha_star at col + d
        row = j * k
        G[n + row: n + row + k, col: col + k] = np.eye(k)
        if _in_hull(F, s, tol):
            vacuous[j] = True
            E[row: row + k, col: col + k] = np.eye(k)
            continue
        # sum_i alpha_i F[i] + v - alpha_star s = 0
        E[row: row + d, :d] = np.eye(d)
        E[row: row + d, col: col + d] = F.T
        E[row: row + d, col + d] = -s
        # sum_i alpha_i - alpha_star = -1
        E[row + d, col: col + d] = 1.0
        E[row + d, col + d] = -1.0
        f[row + d] = -1.0
    return VertexFeasibleRegion(d, m, n, E, f, G, h, vacuous)


def reposition_vertex(inst, T, i, tol=DEFAULT_TOL, expand=False):
    """Move vertex ``i`` to minimize its worst ``P`` violation with ``S`` kept covered.

    Returns ``(vertex, infeasibility)``.  A vertex already within ``tol`` of
    ``P`` stays put unless ``expand`` is set, in which case it is pushed as
    far as ``P`` allows away from the centroid of the other vertices, which
    enlarges ``T`` and loosens the coverage constraints on the rest.  A move
    that would not reduce the violation is rejected.
    """
    v_cur = T.vertices[i]
    t_cur = max(0.0, float(inst.P.violation(v_cur)))
    if t_cur <= tol and not expand:
        return v_cur.copy(), t_cur
    fixed = np.delete(T.vertices, i, axis=0)
    region = feasible_region_last_vertex(inst, fixed, tol)
    if t_cur <= tol:
        direction = v_cur - fixed.mean(axis=0)
        lp = region.to_lp()
        c = np.zeros(lp.n_vars)
        c[: inst.dim] = -direction / max(float(np.linalg.norm(direction)), 1e-300)
        res = lp_solve(LPProblem(c=c, G=lp.G, h=lp.h, E=lp.E, f=lp.f, nonneg=lp.nonneg))
        if not res.optimal:
            return v_cur.copy(), t_cur
    else:
        res = lp_solve(region.to_lp(relax=True))
        if not res.optimal:
            # the current position is feasible up to rounding unless T lost coverage
            if float(np.min(barycentric(T, inst.S, tol))) < -tol:
                raise CoverageInfeasible(f"no position of vertex {i} covers S (LP {res.status})")
            return v_cur.copy(), t_cur
    v_new = region.vertex_of(res.x)
    t_new = max(0.0, float(inst.P.violation(v_new)))
    if t_new > tol and t_new >= t_cur:
        return v_cur.copy(), t_cur
    candidate = T.replace_vertex(i, v_new)
    try:
        lam = barycentric(candidate, inst.S, tol)
    except DegenerateSimplex:
        return v_cur.copy(), t_cur
    if float(np.min(lam)) < -tol:
        return v_cur.copy(), t_cur
    return v_new, t_new


def _random_rotation(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    return q * np.sign(np.diag(r))


def local_search(inst, config=None, initial=None, callback=None):
    """Round-robin single-vertex repositioning.

    Starts from ``initial`` when given, otherwise from :func:`initial_simplex`;
    restarts use seeded random rotations of the starting simplex.  ``callback``
    receives ``(sweep, total_infeasibility)`` after each sweep.
    """
    cfg = config or SearchConfig()
    tol = cfg.infeasibility_tol
    if inst.dim == 1:
        T = solve_rank2(inst)
        return SearchResult(SOLVED, T, vertex_infeasibility(inst, T))

    rng = np.random.default_rng(cfg.rng_seed)
    best = None
    total_sweeps = 0
    for attempt in range(cfg.restarts + 1):
        if attempt == 0 and initial is not None:
            T = initial
        else:
            rot = None if attempt == 0 else _random_rotation(rng, inst.dim)
            T = initial_simplex(inst.S, cfg.init_margin, rot, cfg.tol)
        infeas = vertex_infeasibility(inst, T)
        history = [float(infeas.sum())]
        if verify_solution(inst, T, tol).ok:
            return SearchResult(SOLVED, T, infeas, 0, attempt, history)
        best_total = history[0]
        stall = 0
        for sweep in range(cfg.max_sweeps):
            total_sweeps += 1
            V = T.vertices.copy()
            try:
                for i in range(inst.k):
                    others_bad = np.delete(infeas, i).max(initial=0.0) > tol
                    v, infeas[i] = reposition_vertex(inst, Simplex(V), i, tol, expand=others_bad)
                    V[i] = v
            except CoverageInfeasible as exc:
                # rounding drift broke coverage; abandon this start
                logger.debug("attempt %d: %s", attempt, exc)
                T = Simplex(V)
                infeas = vertex_infeasibility(inst, T)
                total = float(infeas.sum())
                break
            T = Simplex(V)
            total = float(infeas.sum())
            history.append(total)
            if callback is not None:
                callback(total_sweeps, total)
            if total <= tol and verify_solution(inst, T, tol).ok:
                return SearchResult(SOLVED, T, infeas, total_sweeps, attempt, history)
            if best_total - total > tol:
                best_total, stall = total, 0
            else:
                stall += 1
                if stall >= cfg.stall_sweeps:
                    break
        logger.debug("attempt %d stalled at total infeasibility %.3g", attempt, total)
        if best is None or total < best.infeasibility.sum():
            best = SearchResult(STALLED, T, infeas.copy(), total_sweeps, attempt, history)
    best.sweeps = total_sweeps
    return best
