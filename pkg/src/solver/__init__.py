"""Grounding, search, model checking and the exhaustive oracle."""
from src.solver.checker import Verdict, check_model
from src.solver.evaluator import eval_constraint
from src.solver.grounding import GroundProblem, KindPool, ground
from src.solver.oracle import brute_force_solve
from src.solver.search import SolveOptions, SolveResult, SolveStatus, count_vectors, solve

__all__ = [
    "GroundProblem",
    "KindPool",
    "SolveOptions",
    "SolveResult",
    "SolveStatus",
    "Verdict",
    "brute_force_solve",
    "check_model",
    "count_vectors",
    "eval_constraint",
    "ground",
    "solve",
]
