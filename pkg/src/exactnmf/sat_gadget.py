"""3-SAT gadget: encode a CNF as INTERMEDIATE SIMPLEX, build and decode solutions.

Coordinates of R^(3p+q) are laid out as ``s_1..s_p, t_1..t_p, u_1..u_p,
v_1..v_q``.  Variable ``i`` is represented by the ``(s_i, t_i, u_i)`` block and
clause ``j`` by ``v_j``.
"""
import itertools
from dataclasses import dataclass

import numpy as np

from .exceptions import ParseError, StructureMismatch, TooLarge
from .geometry import IntermediateSimplexInstance, Polyhedron, Simplex

MU = 5 / 8

# (s, t) of the three x_i-positive vertices after rescaling to u = 1/2
C0_PATTERN = ((0.0, 0.0), (0.0, 0.5), (0.5, 0.25))
C1_PATTERN = ((0.5, 0.0), (0.5, 0.5), (0.0, 0.25))

# unscaled (s, t, u) directions of g_{i,1}, g_{i,2}, g_{i,3}
_GC0 = ((0.0, 0.0, 1.0), (0.0, 1.0, 1.0), (1.0, 0.5, 1.0))
_GC1 = ((1.0, 0.0, 1.0), (1.0, 1.0, 1.0), (0.0, 0.5, 1.0))


@dataclass(frozen=True)
class Cnf3:
    """3-CNF over variables ``1..p``; a literal is ``(var, negated)``."""

    p: int
    clauses: tuple

    def __post_init__(self):
        clauses = tuple(tuple((int(v), bool(neg)) for v, neg in c) for c in self.clauses)
        for j, c in enumerate(clauses):
            if len(c) != 3:
                raise ValueError(f"clause {j + 1} has {len(c)} literals, expected 3")
            vars_ = [v for v, _ in c]
            if len(set(vars_)) != 3:
                raise ValueError(f"clause {j + 1} repeats a variable")
            if not all(1 <= v <= self.p for v in vars_):
                raise ValueError(f"clause {j + 1} references a variable outside 1..{self.p}")
        object.__setattr__(self, "clauses", clauses)

    @property
    def q(self):
        return len(self.clauses)

    @classmethod
    def from_ints(cls, p, clauses):
        """Build from DIMACS-style signed integers, e.g. ``[(1, -2, 3)]``."""
        return cls(p, [[(abs(x), x < 0) for x in c] for c in clauses])

    def to_ints(self):
        return [[-v if neg else v for v, neg in c] for c in self.clauses]


def parse_dimacs(text):
    """Parse DIMACS CNF text; every clause must have 3 distinct variables."""
    p = None
    declared = None
    clauses = []
    current = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError(f"line {lineno}: malformed header {line!r}")
            p, declared = int(parts[2]), int(parts[3])
            continue
        if p is None:
            raise ParseError(f"line {lineno}: clause before 'p cnf' header")
        try:
            lits = [int(x) for x in line.split()]
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer literal") from None
        for x in lits:
            if x == 0:
                clauses.append(current)
                current = []
            else:
                current.append(x)
    if p is None:
        raise ParseError("missing 'p cnf' header")
    if current:
        raise ParseError("last clause is not terminated by 0")
    if declared is not None and declared != len(clauses):
        raise ParseError(f"header declares {declared} clauses, found {len(clauses)}")
    try:
        return Cnf3.from_ints(p, clauses)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def format_dimacs(phi):
    lines = [f"p cnf {phi.p} {phi.q}"]
    lines += [" ".join(str(x) for x in c) + " 0" for c in phi.to_ints()]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GadgetLayout:
    """Coordinate map of an encoding; keeps the clauses so decoding is self-contained."""

    p: int
    q: int
    clauses: tuple = ()

    @property
    def formula(self):
        return Cnf3.from_ints(self.p, self.clauses)

    @property
    def dim(self):
        return 3 * self.p + self.q

    def s(self, i):
        return i - 1

    def t(self, i):
        return self.p + i - 1

    def u(self, i):
        return 2 * self.p + i - 1

    def v(self, j):
        return 3 * self.p + j - 1

    def block(self, i):
        return [self.s(i), self.t(i), self.u(i)]

    def index_map(self):
        out = {}
        for i in range(1, self.p + 1):
            out[f"s{i}"], out[f"t{i}"], out[f"u{i}"] = self.block(i)
        for j in range(1, self.q + 1):
            out[f"v{j}"] = self.v(j)
        return out


@dataclass(frozen=True)
class DecodeDiagnostics:
    classes: tuple  # "C0" / "C1" per variable
    falsified: tuple  # m_j per clause
    mu: tuple  # (mu_i1, mu_i2, mu_i3) per variable, ordered as the pattern
    zero_vertex: int
    ray_vertices: tuple  # vertex index carrying h_j, per clause
    ray_scales: tuple  # lambda_j per clause


def evaluate(phi, sigma):
    """Return ``(satisfied, m)`` where ``m[j]`` counts literals of clause j falsified."""
    sigma = tuple(bool(x) for x in sigma)
    if len(sigma) != phi.p:
        raise ValueError(f"assignment has {len(sigma)} bits, formula {phi.p} variables")
    m = tuple(sum(sigma[v - 1] == neg for v, neg in c) for c in phi.clauses)
    return all(mj <= 2 for mj in m), m


def brute_force_sat(phi, max_vars=24):
    """First satisfying assignment in lexicographic order (False < True), or None."""
    if phi.p > max_vars:
        raise TooLarge(f"{phi.p} variables exceeds the brute-force limit of {max_vars}")
    for bits in itertools.product((False, True), repeat=phi.p):
        if evaluate(phi, bits)[0]:
            return bits
    return None


def encode(phi):
    """INTERMEDIATE SIMPLEX instance of dimension 3p+q with 6p+4q facets and 4p+q+2 points."""
    p, q = phi.p, phi.q
    lay = GadgetLayout(p, q, tuple(tuple(c) for c in phi.to_ints()))
    d = lay.dim
    rows, rhs = [], []

    def row(coeffs, b=0.0):
        r = np.zeros(d)
        for idx, c in coeffs:
            r[idx] += c
        rows.append(r)
        rhs.append(b)

    for i in range(1, p + 1):
        row([(lay.s(i), 1.0)])
        row([(lay.u(i), 1.0), (lay.s(i), -1.0)])
    for i in range(1, p + 1):
        row([(lay.t(i), 1.0)])
        row([(lay.u(i), 1.0), (lay.t(i), -1.0)])
    for i in range(1, p + 1):
        row([(lay.u(i), 1.0)])
        row([(lay.u(i), -1.0)], -1.0)
    for j in range(1, q + 1):
        row([(lay.v(j), 1.0)])
    for j, clause in enumerate(phi.clauses, 1):
        for i, neg in clause:
            if neg:
                # s_i - 2 t_i <= v_j
                row([(lay.v(j), 1.0), (lay.s(i), -1.0), (lay.t(i), 2.0)])
            else:
                # 2 t_i - 2 s_i - u_i <= v_j
                row([(lay.v(j), 1.0), (lay.t(i), -2.0), (lay.s(i), 2.0), (lay.u(i), 1.0)])
    P = Polyhedron(np.array(rows), np.array(rhs))

    pts = [np.zeros(d), b_point(lay)]
    for j in range(1, q + 1):
        h = np.zeros(d)
        h[lay.v(j)] = 1.0
        pts.append(h)
    for st in ((0.0, 0.25), (0.5, 0.25), (0.25, 0.125), (0.25, 0.375)):
        for i in range(1, p + 1):
            r = np.zeros(d)
            r[lay.s(i)], r[lay.t(i)], r[lay.u(i)] = st[0], st[1], 0.5
            r[3 * p:] = 1.0
            pts.append(r)
    return IntermediateSimplexInstance(P, np.array(pts)), lay


def b_point(lay):
    p = lay.p
    x = np.zeros(lay.dim)
    x[:p] = 1 / (4 * p)
    x[p:2 * p] = 1 / (4 * p)
    x[2 * p:3 * p] = 1 / (2 * p)
    x[3 * p:] = 2.5 / (8 * p)
    return x


B_INDEX = 1  # position of b in the encoded point list


def default_lambda(phi):
    return 8.0 * phi.p * (3 * phi.p + phi.q)


def witness_simplex(phi, sigma, lam=None):
    """Solution simplex built from an assignment (valid iff ``sigma`` satisfies ``phi``).

    Vertex order: ``0``, ``lam*h_1..lam*h_q``, then ``g_{i,1}, g_{i,2}, g_{i,3}``
    for ``i = 1..p``.
    """
    sigma = tuple(bool(x) for x in sigma)
    if len(sigma) != phi.p:
        raise ValueError(f"assignment has {len(sigma)} bits, formula {phi.p} variables")
    lam = default_lambda(phi) if lam is None else float(lam)
    lay = GadgetLayout(phi.p, phi.q)
    d = lay.dim
    V = [np.zeros(d)]
    for j in range(1, phi.q + 1):
        h = np.zeros(d)
        h[lay.v(j)] = lam
        V.append(h)
    for i in range(1, phi.p + 1):
        pattern = _GC1 if sigma[i - 1] else _GC0
        g = np.zeros((3, d))
        for kk in range(3):
            g[kk, lay.block(i)] = MU * np.array(pattern[kk])
        for j, clause in enumerate(phi.clauses, 1):
            for var, neg in clause:
                if var != i:
                    continue
                if not sigma[i - 1] and not neg:
                    g[1, lay.v(j)] = MU
                elif sigma[i - 1] and neg:
                    g[0, lay.v(j)] = MU
        V.extend(g)
    return Simplex(np.array(V))


def _match_pattern(points, pattern, tol):
    """Whether the 3 (s, t) points equal ``pattern`` as a set, within ``tol``."""
    used = set()
    for target in pattern:
        hits = [a for a, pt in enumerate(points)
                if a not in used and np.max(np.abs(pt - np.array(target))) <= tol]
        if len(hits) != 1:
            return False
        used.add(hits[0])
    return True


def decode(inst, layout, T, tol=1e-6):
    """Read the assignment off a solution simplex of ``encode(phi)``.

    Raises :class:`StructureMismatch` when the vertex census or a triple
    classification fails.
    """
    V = T.vertices
    p, q = layout.p, layout.q
    if V.shape != (3 * p + q + 1, layout.dim):
        raise StructureMismatch(f"expected {3 * p + q + 1} vertices in R^{layout.dim}")
    scale = max(1.0, float(np.max(np.abs(V))))
    ztol = tol * scale
    absV = np.abs(V)

    zero = np.flatnonzero(np.max(absV, axis=1) <= ztol)
    if zero.size != 1:
        raise StructureMismatch(f"found {zero.size} vertices at the origin, expected 1")

    rays, scales = [], []
    for j in range(1, q + 1):
        c = layout.v(j)
        others = np.delete(absV, c, axis=1)
        hit = np.flatnonzero((np.max(others, axis=1) <= ztol) & (V[:, c] >= 1 - tol))
        if hit.size != 1:
            raise StructureMismatch(f"found {hit.size} vertices on ray h_{j}, expected 1")
        rays.append(int(hit[0]))
        scales.append(float(V[hit[0], c]))

    x_cols = np.arange(3 * p)
    classes, mus = [], []
    for i in range(1, p + 1):
        own = layout.block(i)
        foreign = np.setdiff1d(x_cols, own)
        supported = np.max(absV[:, foreign], axis=1, initial=0.0) <= ztol
        positive = np.max(V[:, own], axis=1) > ztol
        idx = np.flatnonzero(supported & positive)
        if idx.size != 3:
            raise StructureMismatch(f"variable {i} has {idx.size} x-positive vertices, expected 3")
        blocks = V[np.ix_(idx, own)]
        u = blocks[:, 2]
        if np.any(u <= ztol):
            raise StructureMismatch(f"variable {i}: x-positive vertex with u_{i} = 0")
        st = blocks[:, :2] * (0.5 / u)[:, None]
        is0 = _match_pattern(st, C0_PATTERN, tol)
        is1 = _match_pattern(st, C1_PATTERN, tol)
        if is0 == is1:
            raise StructureMismatch(f"variable {i}: vertex triple {st.tolist()} matches "
                                    f"{'both' if is0 else 'neither'} pattern")
        pattern = C0_PATTERN if is0 else C1_PATTERN
        # mu in pattern order: the vertex nearest each target
        mu = tuple(float(u[np.argmin(np.max(np.abs(st - np.array(t)), axis=1))]) for t in pattern)
        classes.append("C0" if is0 else "C1")
        mus.append(mu)

    sigma = tuple(c == "C1" for c in classes)
    falsified = evaluate(layout.formula, sigma)[1] if layout.clauses else ()
    diag = DecodeDiagnostics(tuple(classes), falsified, tuple(mus), int(zero[0]),
                             tuple(rays), tuple(scales))
    return sigma, diag


def lemma_gadget():
    """The unit-square instance with exactly two solutions ``T0`` and ``T1``."""
    P = Polyhedron(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]),
                   np.array([0.0, -1.0, 0.0, -1.0]))
    S = np.array([[0.0, 0.5], [1.0, 0.5], [0.5, 0.25], [0.5, 0.75]])
    T0 = Simplex([[0.0, 0.0], [0.0, 1.0], [1.0, 0.5]])
    T1 = Simplex([[1.0, 0.0], [1.0, 1.0], [0.0, 0.5]])
    return IntermediateSimplexInstance(P, S), T0, T1
