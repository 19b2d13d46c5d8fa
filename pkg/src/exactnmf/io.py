"""Plain-text file formats.

A matrix file is a ``m n`` line followed by ``m`` rows.  Typed files start
with a tag line naming the kind, then a line of dimensions, then rows::

    intermediate-simplex        # n d m, then n rows "a_1 .. a_d b", then m points
    simplex                     # k d, then k vertex rows
    nmf-instance                # m n k, then the rows of A
    gadget-layout               # p q, then q clause rows of signed literals
    reduction-transcript        # m k n_deleted, deleted indices, Qhat, D, W0, H0

Numbers are written with 17 significant digits so reading back is lossless.
"""
import numpy as np

from .exceptions import ParseError
from .geometry import IntermediateSimplexInstance, Polyhedron, Simplex
from .reductions import NmfInstance, P1Instance, ReductionTranscript
from .sat_gadget import GadgetLayout

TAGS = ("intermediate-simplex", "simplex", "nmf-instance", "gadget-layout", "reduction-transcript")


def fmt(x):
    return f"{float(x) + 0.0:.17g}"


def _rows(M):
    return [" ".join(fmt(x) for x in row) for row in np.atleast_2d(M)]


def _lines(text):
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def _numbers(line, count=None, what="row"):
    try:
        vals = [float(x) for x in line.split()]
    except ValueError:
        raise ParseError(f"non-numeric entry in {what}: {line!r}") from None
    if count is not None and len(vals) != count:
        raise ParseError(f"{what} has {len(vals)} entries, expected {count}")
    if not np.all(np.isfinite(vals)):
        raise ParseError(f"non-finite entry in {what}")
    return vals


def _ints(line, count, what):
    try:
        vals = [int(x) for x in line.split()]
    except ValueError:
        raise ParseError(f"{what} must be integers: {line!r}") from None
    if len(vals) != count or any(v < 0 for v in vals):
        raise ParseError(f"{what} must be {count} nonnegative integers: {line!r}")
    return vals


def _block(lines, start, nrows, ncols, what):
    if len(lines) < start + nrows:
        raise ParseError(f"{what}: expected {nrows} rows, file ends after {len(lines) - start}")
    M = np.array([_numbers(lines[start + i], ncols, f"{what} row {i + 1}") for i in range(nrows)],
                 dtype=float).reshape(nrows, ncols)
    return M, start + nrows


def _expect_end(lines, pos, what):
    if len(lines) != pos:
        raise ParseError(f"{what}: {len(lines) - pos} unexpected trailing lines")


def parse_matrix(text):
    lines = _lines(text)
    if not lines:
        raise ParseError("empty matrix file")
    m, n = _ints(lines[0], 2, "matrix header")
    if m == 0 or n == 0:
        raise ParseError(f"matrix must be nonempty, got {m} x {n}")
    M, pos = _block(lines, 1, m, n, "matrix")
    _expect_end(lines, pos, "matrix")
    return M


def format_matrix(M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return "\n".join([f"{M.shape[0]} {M.shape[1]}"] + _rows(M)) + "\n"


def file_tag(text):
    """Type tag of a typed file, or None for a bare matrix."""
    lines = _lines(text)
    return lines[0] if lines and lines[0] in TAGS else None


def _typed(text, tag, ndims):
    lines = _lines(text)
    if not lines or lines[0] != tag:
        found = lines[0] if lines else "nothing"
        raise ParseError(f"expected a '{tag}' file, found {found!r}")
    if len(lines) < 2:
        raise ParseError(f"'{tag}' file lacks its dimension line")
    return lines, _ints(lines[1], ndims, f"{tag} dimensions")


def format_instance(inst):
    n, d, m = inst.n, inst.dim, inst.m
    body = _rows(np.column_stack([inst.P.A, inst.P.b])) + _rows(inst.S)
    return "\n".join(["intermediate-simplex", f"{n} {d} {m}"] + body) + "\n"


def parse_instance(text):
    lines, (n, d, m) = _typed(text, "intermediate-simplex", 3)
    Ab, pos = _block(lines, 2, n, d + 1, "constraint")
    S, pos = _block(lines, pos, m, d, "point")
    _expect_end(lines, pos, "intermediate-simplex")
    return IntermediateSimplexInstance(Polyhedron(Ab[:, :d], Ab[:, d]), S)


def format_simplex(T):
    k, d = T.vertices.shape
    return "\n".join(["simplex", f"{k} {d}"] + _rows(T.vertices)) + "\n"


def parse_simplex(text):
    lines, (k, d) = _typed(text, "simplex", 2)
    if k != d + 1:
        raise ParseError(f"a simplex in R^{d} has {d + 1} vertices, header says {k}")
    V, pos = _block(lines, 2, k, d, "vertex")
    _expect_end(lines, pos, "simplex")
    return Simplex(V)


def format_nmf_instance(inst):
    m, n = inst.A.shape
    return "\n".join(["nmf-instance", f"{m} {n} {inst.k}"] + _rows(inst.A)) + "\n"


def parse_nmf_instance(text, tol=None):
    lines, (m, n, k) = _typed(text, "nmf-instance", 3)
    A, pos = _block(lines, 2, m, n, "matrix")
    _expect_end(lines, pos, "nmf-instance")
    return NmfInstance(A, k) if tol is None else NmfInstance(A, k, tol)


def format_layout(layout):
    clauses = [" ".join(str(x) for x in c) for c in layout.clauses]
    return "\n".join(["gadget-layout", f"{layout.p} {layout.q}"] + clauses) + "\n"


def parse_layout(text):
    lines, (p, q) = _typed(text, "gadget-layout", 2)
    if len(lines) != 2 + q:
        raise ParseError(f"gadget-layout lists {len(lines) - 2} clauses, header says {q}")
    clauses = []
    for line in lines[2:]:
        try:
            lits = tuple(int(x) for x in line.split())
        except ValueError:
            raise ParseError(f"bad clause line {line!r}") from None
        clauses.append(lits)
    layout = GadgetLayout(p, q, tuple(clauses))
    try:
        layout.formula
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return layout


def format_transcript(tr):
    W0, H0 = tr.original_instance.W0, tr.original_instance.H0
    (m, k), nd = W0.shape, len(tr.deleted_rows)
    deleted = " ".join(str(i) for i in tr.deleted_rows) or "-"
    body = [deleted] + _rows(tr.Qhat) + _rows(tr.D_diag) + _rows(W0) + _rows(H0)
    return "\n".join(["reduction-transcript", f"{m} {k} {H0.shape[1]} {nd}"] + body) + "\n"


def parse_transcript(text):
    lines, (m, k, n, nd) = _typed(text, "reduction-transcript", 4)
    if len(lines) < 3:
        raise ParseError("reduction-transcript lacks the deleted-row line")
    deleted = () if lines[2] == "-" else tuple(_ints(lines[2], nd, "deleted rows"))
    if len(deleted) != nd:
        raise ParseError(f"header lists {nd} deleted rows, found {len(deleted)}")
    Qhat, pos = _block(lines, 3, k, k, "Qhat")
    D, pos = _block(lines, pos, 1, m - nd, "D")
    W0, pos = _block(lines, pos, m, k, "W0")
    H0, pos = _block(lines, pos, k, n, "H0")
    _expect_end(lines, pos, "reduction-transcript")
    return ReductionTranscript(deleted, Qhat, D[0], P1Instance(W0, H0))


def parse_assignment(text):
    bits = "".join(text.split())
    if not bits or set(bits) - {"0", "1"}:
        raise ParseError("assignment must be one line of 0/1 characters")
    return tuple(c == "1" for c in bits)


def format_assignment(sigma):
    return "".join("1" if b else "0" for b in sigma) + "\n"


def read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def write_text(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
