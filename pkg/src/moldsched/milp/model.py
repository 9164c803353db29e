"""Generic mixed-integer linear program container and solver result types."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping


class MilpError(Exception):
    """Base class for solver-facing errors."""


class MalformedModelError(MilpError):
    """The model violates its own invariants (dangling names, bad bounds)."""


class UnboundedModelError(MilpError):
    """The LP relaxation is unbounded below, so the MILP is ill-posed."""


class UnknownVariableError(MilpError):
    """An imported solution refers to a variable the model does not have."""


class ConstraintViolatedError(MilpError):
    """An imported solution violates a constraint or a variable bound.

    ``index`` is the constraint position (None for variable bounds) and
    ``slack`` the violation magnitude.
    """

    def __init__(self, detail: str, index: int | None, slack: float):
        super().__init__(f"{detail} (violation {slack:.3e})")
        self.index = index
        self.slack = slack


class VarKind(Enum):
    BINARY = "binary"
    CONTINUOUS = "continuous"


class Relation(Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class Status(Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VarKind
    lower: float
    upper: float


@dataclass(frozen=True)
class Constraint:
    coeffs: Mapping[str, float]
    relation: Relation
    rhs: float


@dataclass
class MilpModel:
    """Minimization MILP over named binary and continuous variables."""

    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)

    def add_binary(self, name: str, lower: float = 0.0, upper: float = 1.0) -> str:
        self.variables.append(Variable(name, VarKind.BINARY, lower, upper))
        return name

    def add_continuous(self, name: str, lower: float, upper: float) -> str:
        self.variables.append(Variable(name, VarKind.CONTINUOUS, lower, upper))
        return name

    def add_constraint(
        self, coeffs: Mapping[str, float], relation: Relation, rhs: float
    ) -> None:
        self.constraints.append(Constraint(dict(coeffs), relation, rhs))

    def set_objective(self, coeffs: Mapping[str, float]) -> None:
        self.objective = dict(coeffs)

    @property
    def var_names(self) -> list[str]:
        return [v.name for v in self.variables]

    @property
    def binaries(self) -> list[Variable]:
        return [v for v in self.variables if v.kind == VarKind.BINARY]

    def validate(self) -> None:
        """Raise MalformedModelError unless the model is well-formed."""
        names = set()
        for v in self.variables:
            if v.name in names:
                raise MalformedModelError(f"duplicate variable name {v.name!r}")
            names.add(v.name)
            if not (math.isfinite(v.lower) or v.lower == -math.inf):
                raise MalformedModelError(f"bad lower bound on {v.name!r}: {v.lower}")
            if math.isnan(v.upper):
                raise MalformedModelError(f"bad upper bound on {v.name!r}: {v.upper}")
            if v.lower > v.upper:
                raise MalformedModelError(
                    f"empty bound interval on {v.name!r}: [{v.lower}, {v.upper}]"
                )
            if v.kind == VarKind.BINARY and not (0.0 <= v.lower and v.upper <= 1.0):
                raise MalformedModelError(
                    f"binary {v.name!r} must have bounds within [0, 1]"
                )
        for idx, con in enumerate(self.constraints):
            if not isinstance(con.relation, Relation):
                raise MalformedModelError(f"constraint {idx} has no relation")
            if not math.isfinite(con.rhs):
                raise MalformedModelError(f"constraint {idx} has non-finite rhs")
            for name, coef in con.coeffs.items():
                if name not in names:
                    raise MalformedModelError(
                        f"constraint {idx} references unknown variable {name!r}"
                    )
                if not math.isfinite(coef):
                    raise MalformedModelError(
                        f"constraint {idx} has non-finite coefficient on {name!r}"
                    )
        for name, coef in self.objective.items():
            if name not in names:
                raise MalformedModelError(
                    f"objective references unknown variable {name!r}"
                )
            if not math.isfinite(coef):
                raise MalformedModelError(
                    f"objective has non-finite coefficient on {name!r}"
                )


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a solve: status, incumbent, bound, and search statistics.

    ``gap`` is (objective - best_bound) / max(1e-10, |objective|).
    """

    status: Status
    assignment: dict[str, float] | None
    objective: float
    best_bound: float
    gap: float
    nodes: int
    wall_time: float
