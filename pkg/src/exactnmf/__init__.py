"""Exact nonnegative matrix factorization through nested-simplex geometry."""
from .estimator import ExactNMF
from .exceptions import ExactNMFError, SearchStalled
from .geometry import IntermediateSimplexInstance, Polyhedron, Simplex, barycentric
from .linprog import LPProblem, LPResult, lp_solve
from .reductions import (
    FactorPair,
    Factorization,
    NmfInstance,
    NoSolutionFound,
    solve_exact_nmf,
    verify_factorization,
)
from .sat_gadget import Cnf3, decode, encode, lemma_gadget, witness_simplex
from .simplex_search import SearchConfig, local_search, solve_rank2, verify_solution

__version__ = "0.1.0"

__all__ = [
    "ExactNMF", "ExactNMFError", "SearchStalled",
    "IntermediateSimplexInstance", "Polyhedron", "Simplex", "barycentric",
    "LPProblem", "LPResult", "lp_solve",
    "FactorPair", "Factorization", "NmfInstance", "NoSolutionFound",
    "solve_exact_nmf", "verify_factorization",
    "Cnf3", "decode", "encode", "lemma_gadget", "witness_simplex",
    "SearchConfig", "local_search", "solve_rank2", "verify_solution",
]
