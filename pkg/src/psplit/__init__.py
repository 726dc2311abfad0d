"""P-split formulations for disjunctive programs with separable convex constraints.

Modules: ``model`` (disjunctive models), ``partition``, ``bounds`` (alpha
bounds), ``reformulate`` (big-M, P-split and hull builders), ``simplex`` and
``solver`` (LP, outer approximation, branch-and-bound), ``problems``
(instance generators), ``mps``, ``experiments`` and ``cli``.
"""

from .model import DisjunctiveModel, load_model, save_model, validate
from .partition import Partition, even_index_partition, nested_chain
from .reformulate import FORMULATIONS, FlatMip, build, formulation_stats
from .solver import SolverOptions, branch_and_bound, solve_lp, solve_relaxation

__all__ = [
    "DisjunctiveModel", "load_model", "save_model", "validate", "Partition",
    "even_index_partition", "nested_chain", "FORMULATIONS", "FlatMip", "build",
    "formulation_stats", "SolverOptions", "branch_and_bound", "solve_lp", "solve_relaxation",
]

__version__ = "0.1.0"
