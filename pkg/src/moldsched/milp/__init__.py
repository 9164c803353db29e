"""Self-contained mixed-integer linear programming: model container,
branch-and-bound solver over a bounded-variable simplex, and LP-format
interchange with external solvers."""

from .lpformat import export_lp, format_solution, import_solution, parse_lp
from .model import (
    Constraint,
    ConstraintViolatedError,
    MalformedModelError,
    MilpError,
    MilpModel,
    Relation,
    SolveResult,
    Status,
    UnboundedModelError,
    UnknownVariableError,
    Variable,
    VarKind,
)
from .solver import FEASIBILITY_TOL, GAP_TOL, INTEGRALITY_TOL, solve

__all__ = [
    "Constraint",
    "ConstraintViolatedError",
    "FEASIBILITY_TOL",
    "GAP_TOL",
    "INTEGRALITY_TOL",
    "MalformedModelError",
    "MilpError",
    "MilpModel",
    "Relation",
    "SolveResult",
    "Status",
    "UnboundedModelError",
    "UnknownVariableError",
    "VarKind",
    "Variable",
    "export_lp",
    "format_solution",
    "import_solution",
    "parse_lp",
    "solve",
]
