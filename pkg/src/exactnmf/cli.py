"""Command-line front end.

Exit codes: 0 success, 1 bad input, 2 the local search stalled.  Reports are
``key=value`` lines on stdout.
"""
import argparse
import logging
import os
import sys

import numpy as np

from . import io
from .exceptions import ExactNMFError
from .numerics import DEFAULT_TOL, scale_of
from .reductions import (
    FactorPair,
    NmfInstance,
    nmf_to_p1,
    p1_to_restricted,
    restricted_to_simplex,
    solve_exact_nmf,
    verify_factorization,
)
from .sat_gadget import decode, encode, evaluate, parse_dimacs, witness_simplex
from .simplex_search import SearchConfig, local_search, verify_solution

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_STALL = 2


class _InputError(Exception):
    pass


def _report(out, **pairs):
    for key, val in pairs.items():
        if isinstance(val, bool):
            val = "true" if val else "false"
        elif isinstance(val, (float, np.floating)):
            val = io.fmt(val)
        elif isinstance(val, (tuple, list)):
            val = ",".join(io.fmt(v) if isinstance(v, float) else str(v) for v in val)
        print(f"{key}={val}", file=out)


def _config(args):
    return SearchConfig(max_sweeps=args.max_sweeps, restarts=args.restarts,
                        rng_seed=args.seed, tol=args.tol)


def _prefix(args, path):
    if args.out:
        return args.out
    return os.path.splitext(path)[0]


def cmd_nmf_solve(args, out):
    A = io.parse_matrix(io.read_text(args.matrix))
    inst = NmfInstance(A, args.k, args.tol)
    warm = io.parse_matrix(io.read_text(args.warm_start)) if args.warm_start else None
    result = solve_exact_nmf(inst, _config(args), warm_start=warm, tol=args.tol)
    search = result.search
    stats = {}
    if search is not None:
        stats = dict(sweeps=search.sweeps, restarts=search.restarts)
    if not result.solved:
        _report(out, status="stalled", reason=result.reason,
                total_infeasibility=float(np.sum(result.infeasibility)), **stats)
        return EXIT_STALL
    prefix = _prefix(args, args.matrix)
    pair = result.factors
    io.write_text(prefix + ".W.txt", io.format_matrix(pair.W))
    io.write_text(prefix + ".H.txt", io.format_matrix(pair.H))
    _report(out, status="factorization", residual=result.residual,
            relative_residual=result.residual / scale_of(A),
            w_path=prefix + ".W.txt", h_path=prefix + ".H.txt", **stats)
    return EXIT_OK


def cmd_reduce(args, out):
    A = io.parse_matrix(io.read_text(args.matrix))
    inst = NmfInstance(A, args.k, args.tol)
    if inst.k < 2:
        raise _InputError("reduce needs k >= 2; rank-one matrices have no simplex instance")
    p1 = nmf_to_p1(inst, args.tol)
    restricted, transcript = p1_to_restricted(p1, args.tol)
    sinst = restricted_to_simplex(restricted).validate(args.tol)
    prefix = _prefix(args, args.matrix)
    io.write_text(prefix + ".is.txt", io.format_instance(sinst))
    io.write_text(prefix + ".transcript.txt", io.format_transcript(transcript))
    _report(out, status="ok", k=sinst.k, facets=sinst.n, points=sinst.m,
            deleted_rows=len(transcript.deleted_rows),
            instance_path=prefix + ".is.txt", transcript_path=prefix + ".transcript.txt")
    return EXIT_OK


def cmd_is_solve(args, out):
    inst = io.parse_instance(io.read_text(args.instance)).validate(args.tol)
    initial = io.parse_simplex(io.read_text(args.warm_start)) if args.warm_start else None
    if initial is not None and initial.k != inst.k:
        raise _InputError(f"warm-start simplex has {initial.k} vertices, instance needs {inst.k}")
    result = local_search(inst, _config(args), initial=initial)
    path = args.out or os.path.splitext(args.instance)[0] + ".simplex.txt"
    total = float(np.sum(result.infeasibility))
    if not result.solved:
        _report(out, status="stalled", total_infeasibility=total,
                sweeps=result.sweeps, restarts=result.restarts)
        return EXIT_STALL
    io.write_text(path, io.format_simplex(result.simplex))
    _report(out, status="solved", sweeps=result.sweeps, restarts=result.restarts,
            simplex_path=path)
    return EXIT_OK


def _read_cnf(path):
    return parse_dimacs(io.read_text(path))


def cmd_sat_encode(args, out):
    phi = _read_cnf(args.dimacs)
    inst, layout = encode(phi)
    prefix = _prefix(args, args.dimacs)
    io.write_text(prefix + ".is.txt", io.format_instance(inst))
    io.write_text(prefix + ".layout.txt", io.format_layout(layout))
    _report(out, status="ok", p=phi.p, q=phi.q, dim=inst.dim, facets=inst.n, points=inst.m,
            instance_path=prefix + ".is.txt", layout_path=prefix + ".layout.txt")
    return EXIT_OK


def cmd_sat_witness(args, out):
    phi = _read_cnf(args.dimacs)
    sigma = io.parse_assignment(io.read_text(args.assignment))
    if len(sigma) != phi.p:
        raise _InputError(f"assignment has {len(sigma)} bits, formula has {phi.p} variables")
    T = witness_simplex(phi, sigma)
    inst, _ = encode(phi)
    rep = verify_solution(inst, T, args.tol)
    satisfied, m = evaluate(phi, sigma)
    path = args.out or os.path.splitext(args.dimacs)[0] + ".simplex.txt"
    io.write_text(path, io.format_simplex(T))
    _report(out, status="ok", satisfied=satisfied, falsified=m, verified=rep.ok,
            worst_S_violation=rep.worst_S_violation, worst_S_index=rep.worst_S_index,
            simplex_path=path)
    return EXIT_OK


def cmd_sat_decode(args, out):
    inst = io.parse_instance(io.read_text(args.instance))
    layout = io.parse_layout(io.read_text(args.layout))
    T = io.parse_simplex(io.read_text(args.simplex))
    if T.k != inst.k:
        raise _InputError(f"simplex has {T.k} vertices, instance needs {inst.k}")
    sigma, diag = decode(inst, layout, T, tol=max(args.tol, 1e-6))
    if args.out:
        io.write_text(args.out, io.format_assignment(sigma))
    satisfied = evaluate(layout.formula, sigma)[0] if layout.clauses else None
    _report(out, status="ok", assignment=io.format_assignment(sigma).strip(),
            classes=diag.classes, falsified=diag.falsified, zero_vertex=diag.zero_vertex,
            ray_vertices=diag.ray_vertices, ray_scales=diag.ray_scales,
            **({} if satisfied is None else {"satisfied": satisfied}))
    return EXIT_OK


def cmd_verify(args, out):
    text = io.read_text(args.first)
    tag = io.file_tag(text)
    if tag == "intermediate-simplex":
        if args.third is not None:
            raise _InputError("verify INSTANCE SIMPLEX takes two files")
        inst = io.parse_instance(text)
        T = io.parse_simplex(io.read_text(args.second))
        if T.k != inst.k:
            raise _InputError(f"simplex has {T.k} vertices, instance needs {inst.k}")
        rep = verify_solution(inst, T, args.tol)
        _report(out, kind="simplex", ok=rep.ok, worst_S_violation=rep.worst_S_violation,
                worst_P_violation=rep.worst_P_violation, worst_S_index=rep.worst_S_index,
                worst_P_index=rep.worst_P_index)
        return EXIT_OK
    if tag is not None:
        raise _InputError(f"cannot verify against a '{tag}' file")
    if args.third is None:
        raise _InputError("verify MATRIX W H takes three files")
    A = io.parse_matrix(text)
    pair = FactorPair(io.parse_matrix(io.read_text(args.second)),
                      io.parse_matrix(io.read_text(args.third)))
    ok, res, neg = verify_factorization(A, pair, args.tol)
    _report(out, kind="factorization", ok=ok, residual=res,
            relative_residual=res / scale_of(A), worst_negative=neg)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="numerical tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=0, help="seed for restart rotations")
    common.add_argument("--max-sweeps", type=int, default=200)
    common.add_argument("--restarts", type=int, default=3)
    common.add_argument("--warm-start", metavar="PATH", default=None,
                        help="H matrix file (nmf-solve) or simplex file (is-solve)")
    common.add_argument("--out", metavar="PATH", default=None, help="output path or prefix")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="exactnmf", description="Exact nonnegative matrix factorization tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nmf-solve", parents=[common], help="factor a nonnegative matrix of rank k")
    p.add_argument("matrix")
    p.add_argument("k", type=int)
    p.set_defaults(func=cmd_nmf_solve)

    p = sub.add_parser("reduce", parents=[common], help="write the simplex instance of a matrix")
    p.add_argument("matrix")
    p.add_argument("k", type=int)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("is-solve", parents=[common], help="search for a simplex between S and P")
    p.add_argument("instance")
    p.set_defaults(func=cmd_is_solve)

    p = sub.add_parser("sat-encode", parents=[common], help="encode a DIMACS 3-CNF")
    p.add_argument("dimacs")
    p.set_defaults(func=cmd_sat_encode)

    p = sub.add_parser("sat-witness", parents=[common], help="simplex built from an assignment")
    p.add_argument("dimacs")
    p.add_argument("assignment")
    p.set_defaults(func=cmd_sat_witness)

    p = sub.add_parser("sat-decode", parents=[common], help="read an assignment off a solution simplex")
    p.add_argument("instance")
    p.add_argument("layout")
    p.add_argument("simplex")
    p.set_defaults(func=cmd_sat_decode)

    p = sub.add_parser("verify", parents=[common],
                       help="check INSTANCE SIMPLEX, or MATRIX W H")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("third", nargs="?")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.tol < 0 or args.max_sweeps < 1 or args.restarts < 0:
        print("error: --tol must be >= 0, --max-sweeps >= 1, --restarts >= 0", file=err)
        return EXIT_INPUT
    try:
        return args.func(args, out)
    except (ExactNMFError, _InputError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        _report(out, status="error", error=type(exc).__name__)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
