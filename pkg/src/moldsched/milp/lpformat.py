"""LP text format export/import and solution-file exchange.

The writer emits the classic Minimize / Subject To / Bounds / Binaries
sections accepted by mainstream solvers; the reader understands the same
subset, so parsing our own export reproduces an equivalent model.
Solution files are plain "name value" lines with '#' comments.
"""

from __future__ import annotations

import math
import re

from .model import (
    ConstraintViolatedError,
    MilpModel,
    Relation,
    SolveResult,
    Status,
    UnknownVariableError,
    VarKind,
)
from .solver import FEASIBILITY_TOL, INTEGRALITY_TOL

_NUM = "%.17g"


def sanitize_names(names: list[str]) -> dict[str, str]:
    """Map raw names to LP-safe ones ([A-Za-z_][A-Za-z0-9_]*), keeping them unique."""
    out: dict[str, str] = {}
    used: set[str] = set()
    for name in names:
        clean = re.sub(r"[^A-Za-z0-9_]", "_", name)
        if not clean or not (clean[0].isalpha() or clean[0] == "_"):
            clean = "v_" + clean
        candidate = clean
        k = 2
        while candidate in used:
            candidate = f"{clean}_{k}"
            k += 1
        used.add(candidate)
        out[name] = candidate
    return out


def _coef_str(coef: float) -> str:
    return _NUM % coef


def _expr(coeffs: dict[str, float], order: list[str], names: dict[str, str]) -> str:
    parts: list[str] = []
    for name in order:
        coef = coeffs.get(name, 0.0)
        if coef == 0.0:
            continue
        mag = abs(coef)
        term = names[name] if mag == 1.0 else f"{_coef_str(mag)} {names[name]}"
        if not parts:
            parts.append(term if coef > 0 else f"- {term}")
        else:
            parts.append(f"+ {term}" if coef > 0 else f"- {term}")
    return " ".join(parts) if parts else "0"


def export_lp(model: MilpModel) -> str:
    """Render the model in LP text format."""
    model.validate()
    names = sanitize_names(model.var_names)
    order = model.var_names
    lines = ["Minimize", f" obj: {_expr(model.objective, order, names)}"]
    lines.append("Subject To")
    for idx, con in enumerate(model.constraints, start=1):
        expr = _expr(dict(con.coeffs), order, names)
        lines.append(f" c{idx}: {expr} {con.relation.value} {_coef_str(con.rhs)}")
    lines.append("Bounds")
    for v in model.variables:
        name = names[v.name]
        if v.kind == VarKind.BINARY:
            if (v.lower, v.upper) != (0.0, 1.0):
                if v.lower == v.upper:
                    lines.append(f" {name} = {_coef_str(v.lower)}")
                else:
                    lines.append(
                        f" {_coef_str(v.lower)} <= {name} <= {_coef_str(v.upper)}"
                    )
            continue
        if v.lower == v.upper:
            lines.append(f" {name} = {_coef_str(v.lower)}")
        elif math.isinf(v.upper):
            if v.lower != 0.0:
                lines.append(f" {name} >= {_coef_str(v.lower)}")
        else:
            lines.append(f" {_coef_str(v.lower)} <= {name} <= {_coef_str(v.upper)}")
    lines.append("Binaries")
    for v in model.variables:
        if v.kind == VarKind.BINARY:
            lines.append(f" {names[v.name]}")
    lines.append("End")
    return "\n".join(lines) + "\n"


_SECTIONS = {
    "minimize": "objective",
    "subject to": "constraints",
    "such that": "constraints",
    "st": "constraints",
    "s.t.": "constraints",
    "bounds": "bounds",
    "binaries": "binaries",
    "binary": "binaries",
    "end": "end",
}

_TERM_RE = re.compile(r"([+-])|([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)|([A-Za-z_][A-Za-z0-9_]*)")


def _parse_expr(text: str) -> dict[str, float]:
    coeffs: dict[str, float] = {}
    sign = 1.0
    coef: float | None = None
    pos = 0
    text = text.strip()
    while pos < len(text):
        mat = _TERM_RE.match(text, pos)
        if mat is None:
            if text[pos].isspace():
                pos += 1
                continue
            raise ValueError(f"cannot parse expression at: {text[pos:]!r}")
        pos = mat.end()
        op, num, name = mat.groups()
        if op is not None:
            if coef is not None:
                raise ValueError(f"dangling coefficient in expression {text!r}")
            sign = 1.0 if op == "+" else -1.0
        elif num is not None:
            coef = float(num)
        else:
            value = sign * (coef if coef is not None else 1.0)
            coeffs[name] = coeffs.get(name, 0.0) + value
            sign, coef = 1.0, None
    if coef is not None and coef != 0.0:
        raise ValueError(f"constant term not supported in expression {text!r}")
    return coeffs


def parse_lp(text: str) -> MilpModel:
    """Parse the LP subset produced by export_lp into a fresh model."""
    section = None
    objective: dict[str, float] = {}
    constraints: list[tuple[dict[str, float], Relation, float]] = []
    bounds: dict[str, tuple[float, float]] = {}
    binaries: list[str] = []
    seen: list[str] = []
    seen_set: set[str] = set()

    def note(names) -> None:
        for name in names:
            if name not in seen_set:
                seen_set.add(name)
                seen.append(name)

    for raw in text.splitlines():
        line = raw.split("\\")[0].strip()  # LP comments start with a backslash
        if not line:
            continue
        header = _SECTIONS.get(line.lower())
        if header is not None:
            section = header
            if section == "end":
                break
            continue
        if section == "objective":
            body = line.split(":", 1)[1] if ":" in line else line
            objective.update(_parse_expr(body))
            note(objective)
        elif section == "constraints":
            body = line.split(":", 1)[1] if ":" in line else line
            mat = re.search(r"(<=|>=|=)", body)
            if mat is None:
                raise ValueError(f"constraint without relation: {line!r}")
            lhs, rhs = body[: mat.start()], body[mat.end() :]
            coeffs = _parse_expr(lhs)
            note(coeffs)
            constraints.append((coeffs, Relation(mat.group(1)), float(rhs)))
        elif section == "bounds":
            mat = re.match(
                r"^(?:(\S+)\s*<=\s*)?([A-Za-z_][A-Za-z0-9_]*)\s*(<=|>=|=)\s*(\S+)$", line
            )
            if mat is None:
                raise ValueError(f"cannot parse bound line: {line!r}")
            low, name, op, val = mat.groups()
            note([name])
            lo, up = bounds.get(name, (0.0, math.inf))
            if op == "=":
                lo = up = float(val)
            elif op == ">=":
                lo = float(val)
            else:
                up = float(val)
                if low is not None:
                    lo = float(low)
            bounds[name] = (lo, up)
        elif section == "binaries":
            for name in line.split():
                binaries.append(name)
                note([name])
        else:
            raise ValueError(f"content before any LP section: {line!r}")

    model = MilpModel()
    binary_set = set(binaries)
    for name in seen:
        if name in binary_set:
            lo, up = bounds.get(name, (0.0, 1.0))
            model.add_binary(name, lo, up)
        else:
            lo, up = bounds.get(name, (0.0, math.inf))
            model.add_continuous(name, lo, up)
    for coeffs, relation, rhs in constraints:
        model.add_constraint(coeffs, relation, rhs)
    model.set_objective(objective)
    model.validate()
    return model


def format_solution(result: SolveResult) -> str:
    """Render an assignment as 'name value' lines (the import format)."""
    if result.assignment is None:
        raise ValueError("result carries no assignment")
    lines = [f"# objective {_NUM % result.objective}"]
    for name, value in result.assignment.items():
        lines.append(f"{name} {_NUM % value}")
    return "\n".join(lines) + "\n"


def import_solution(model: MilpModel, text: str) -> SolveResult:
    """Check an externally produced assignment against the model.

    Missing variables default to 0.  Returns a Feasible result whose
    objective is recomputed from the assignment; raises
    UnknownVariableError or ConstraintViolatedError otherwise.
    """
    model.validate()
    known = {v.name: v for v in model.variables}
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"solution line {lineno} is not 'name value': {raw!r}")
        name, val = parts
        if name not in known:
            raise UnknownVariableError(f"unknown variable {name!r} on line {lineno}")
        values[name] = float(val)

    assignment = {v.name: values.get(v.name, 0.0) for v in model.variables}
    for v in model.variables:
        val = assignment[v.name]
        if val < v.lower - FEASIBILITY_TOL or val > v.upper + FEASIBILITY_TOL:
            raise ConstraintViolatedError(
                f"variable {v.name!r} = {val} outside bounds [{v.lower}, {v.upper}]",
                None,
                max(v.lower - val, val - v.upper),
            )
        if v.kind == VarKind.BINARY and abs(val - round(val)) > INTEGRALITY_TOL:
            raise ConstraintViolatedError(
                f"binary variable {v.name!r} = {val} is not integral", None,
                abs(val - round(val)),
            )
    for idx, con in enumerate(model.constraints):
        lhs = sum(coef * assignment[name] for name, coef in con.coeffs.items())
        resid = lhs - con.rhs
        bad = (
            (con.relation == Relation.LE and resid > FEASIBILITY_TOL)
            or (con.relation == Relation.GE and resid < -FEASIBILITY_TOL)
            or (con.relation == Relation.EQ and abs(resid) > FEASIBILITY_TOL)
        )
        if bad:
            raise ConstraintViolatedError(
                f"constraint {idx} violated", idx, abs(resid)
            )

    objective = sum(
        coef * assignment[name] for name, coef in model.objective.items()
    )
    return SolveResult(
        status=Status.FEASIBLE,
        assignment=assignment,
        objective=float(objective),
        best_bound=-math.inf,
        gap=math.inf,
        nodes=0,
        wall_time=0.0,
    )
