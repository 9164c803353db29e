"""Branch-and-bound MILP solver over LP relaxations.

Branching is restricted to binary variables (the only integer kind the
model supports); the branching variable is the most fractional one, ties
broken towards the smallest index.  Node selection is a depth-first dive
on the child closer to the LP value, falling back to best-bound from the
open-node pool once a dive ends.  All rules are deterministic, so two
solves of the same model explore identical trees.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover - always present in the test env
    threadpool_limits = None

from . import simplex
from .model import (
    MalformedModelError,
    MilpModel,
    Relation,
    SolveResult,
    Status,
    UnboundedModelError,
    VarKind,
)

INTEGRALITY_TOL = 1e-6
FEASIBILITY_TOL = 1e-6
GAP_TOL = 1e-6

# Nodes whose LP bound is within this margin of the incumbent cannot hold a
# meaningfully better solution; keeping it tiny keeps reported optima exact.
_PRUNE_EPS = 1e-9

_REL_CODE = {Relation.LE: simplex.LE, Relation.EQ: simplex.EQ, Relation.GE: simplex.GE}


@dataclass
class _Standardized:
    names: list[str]
    A: np.ndarray
    rel: np.ndarray
    b: np.ndarray
    c: np.ndarray
    lo: np.ndarray
    up: np.ndarray
    binary_cols: np.ndarray


def _standardize(model: MilpModel) -> _Standardized:
    names = model.var_names
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    m = len(model.constraints)
    A = np.zeros((m, n))
    rel = np.zeros(m, dtype=int)
    b = np.zeros(m)
    for i, con in enumerate(model.constraints):
        for name, coef in con.coeffs.items():
            A[i, index[name]] += coef
        rel[i] = _REL_CODE[con.relation]
        b[i] = con.rhs
    c = np.zeros(n)
    for name, coef in model.objective.items():
        c[index[name]] += coef
    lo = np.array([v.lower for v in model.variables], dtype=float)
    up = np.array([v.upper for v in model.variables], dtype=float)
    binary_cols = np.array(
        [i for i, v in enumerate(model.variables) if v.kind == VarKind.BINARY],
        dtype=int,
    )
    return _Standardized(names, A, rel, b, c, lo, up, binary_cols)


def _node_lp(std: _Standardized, lo: np.ndarray, up: np.ndarray):
    """LP relaxation under bounds [lo, up]; returns (feasible, x, objective).

    Variables are shifted to zero lower bound and fixed ones are dropped
    before the simplex runs, which is the only presolve performed.
    """
    b = std.b - std.A @ lo
    width = up - lo
    free = width > 1e-12
    if not free.any():
        ok = simplex._rows_hold(np.zeros(len(b)), std.rel, b, FEASIBILITY_TOL)
        if not ok:
            return False, None, math.inf
        return True, lo.copy(), float(std.c @ lo)
    status, x_free, _ = simplex.solve_lp(
        std.A[:, free], std.rel, b, std.c[free], width[free]
    )
    if status == simplex.INFEASIBLE:
        return False, None, math.inf
    if status == simplex.UNBOUNDED:
        raise UnboundedModelError("LP relaxation is unbounded below")
    x = lo.copy()
    x[free] = lo[free] + x_free
    lhs = std.A @ x
    if not simplex._rows_hold(lhs, std.rel, std.b, FEASIBILITY_TOL):
        raise simplex.SimplexError("simplex returned an infeasible point")
    return True, x, float(std.c @ x)


def solve(model: MilpModel, time_limit: float) -> SolveResult:
    """Solve ``model`` exactly within ``time_limit`` wall-clock seconds.

    Single-threaded by design: BLAS thread pools are pinned to one thread
    for the duration of the solve so that repeated runs reproduce the same
    pivots, node counts, and objective bit for bit.
    """
    if threadpool_limits is not None:
        with threadpool_limits(limits=1, user_api="blas"):
            return _solve_impl(model, time_limit)
    return _solve_impl(model, time_limit)  # pragma: no cover


def _solve_impl(model: MilpModel, time_limit: float) -> SolveResult:
    if time_limit <= 0:
        raise ValueError(f"time_limit must be positive, got {time_limit}")
    model.validate()
    std = _standardize(model)

    t_start = time.perf_counter()
    t_end = t_start + time_limit

    nbin = len(std.binary_cols)
    incumbent_x: np.ndarray | None = None
    incumbent_obj = math.inf

    def prune_threshold() -> float:
        if incumbent_x is None:
            return math.inf
        return incumbent_obj - _PRUNE_EPS * max(1.0, abs(incumbent_obj))

    def materialize(fixes: dict[int, int]):
        lo = std.lo.copy()
        up = std.up.copy()
        for col, val in fixes.items():
            lo[col] = float(val)
            up[col] = float(val)
        return lo, up

    def repair(fixes: dict[int, int], x: np.ndarray):
        """Re-solve with every binary pinned to its rounded value so the
        continuous part is exactly consistent with integral binaries."""
        full = dict(fixes)
        for col in std.binary_cols:
            full[int(col)] = int(round(x[col]))
        lo, up = materialize(full)
        return _node_lp(std, lo, up)

    heap: list[tuple[float, int, dict[int, int]]] = []
    seq = 0
    nodes = 0
    timed_out = False
    leftover_bounds: list[float] = []

    pending: tuple[float, dict[int, int]] | None = (-math.inf, {})
    while True:
        if pending is None:
            if not heap:
                break
            bound, _, fixes = heapq.heappop(heap)
            if bound >= prune_threshold():
                continue
            pending = (bound, fixes)
        if time.perf_counter() > t_end:
            timed_out = True
            leftover_bounds.append(pending[0])
            break
        bound, fixes = pending
        pending = None

        lo, up = materialize(fixes)
        feasible, x, obj = _node_lp(std, lo, up)
        nodes += 1
        if not feasible or obj >= prune_threshold():
            continue

        branch_col = -1
        if nbin:
            vals = x[std.binary_cols]
            frac = np.abs(vals - np.round(vals))
            worst = int(np.argmax(frac))
            if frac[worst] > INTEGRALITY_TOL:
                branch_col = int(std.binary_cols[worst])
        if branch_col >= 0 and not fixes:
            # Root round-and-repair: pin every binary to its rounded LP
            # value and re-solve; a feasible repair seeds the incumbent.
            ok, x_h, obj_h = repair(fixes, x)
            if ok and obj_h < incumbent_obj:
                incumbent_x, incumbent_obj = x_h, obj_h
        if branch_col < 0:
            ok, x_int, obj_int = repair(fixes, x)
            if ok:
                if obj_int < incumbent_obj:
                    incumbent_x, incumbent_obj = x_int, obj_int
                continue
            # Rounding the (numerically) integral LP point broke feasibility:
            # some binary fraction is load-bearing, so branch on it instead.
            nonzero = frac > 1e-12
            if not nonzero.any():
                raise simplex.SimplexError(
                    "integral LP point has no feasible integer rounding"
                )
            worst = int(np.argmax(np.where(nonzero, frac, -1.0)))
            branch_col = int(std.binary_cols[worst])

        first = 1 if x[branch_col] >= 0.5 else 0
        near = dict(fixes)
        near[branch_col] = first
        far = dict(fixes)
        far[branch_col] = 1 - first
        heapq.heappush(heap, (obj, seq, far))
        seq += 1
        pending = (obj, near)

    wall = time.perf_counter() - t_start
    threshold = prune_threshold()
    open_bounds = [b for b, _, _ in heap if b < threshold] + [
        b for b in leftover_bounds if b < threshold
    ]

    if incumbent_x is None:
        if timed_out:
            bound = min(open_bounds) if open_bounds else math.inf
            return SolveResult(
                Status.TIME_LIMIT, None, math.inf, bound, math.inf, nodes, wall
            )
        return SolveResult(Status.INFEASIBLE, None, math.inf, math.inf, 0.0, nodes, wall)

    assignment = _assignment(std, incumbent_x)
    if timed_out and open_bounds:
        bound = min(min(open_bounds), incumbent_obj)
        gap = (incumbent_obj - bound) / max(1e-10, abs(incumbent_obj))
        if gap > GAP_TOL:
            return SolveResult(
                Status.TIME_LIMIT, assignment, incumbent_obj, bound, gap, nodes, wall
            )
    return SolveResult(
        Status.OPTIMAL, assignment, incumbent_obj, incumbent_obj, 0.0, nodes, wall
    )


def _assignment(std: _Standardized, x: np.ndarray) -> dict[str, float]:
    out: dict[str, float] = {}
    binaries = set(int(col) for col in std.binary_cols)
    for i, name in enumerate(std.names):
        val = float(x[i])
        if i in binaries:
            val = float(round(val))
        out[name] = val
    return out
