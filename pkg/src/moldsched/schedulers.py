"""The four scheduler variants as ILP builders, plus schedule extraction.

Every builder turns a ProblemInstance into a MilpModel whose objective is
the total energy in joules.  The variants form a chain of progressively
smaller search spaces:

  unrestricted  - any width 1..p, any core subset, any start times;
  allocpow2     - widths restricted to powers of two;
  group         - placement restricted to the 2p-1 aligned core groups;
  crown         - groups only, width capped by the task's maximum width,
                  and the execution order fixed from larger groups to
                  smaller ones, which removes all ordering variables.

Variable naming: x_<i>_<j>_<k> picks width/group i for task position j at
frequency level k; z_<core>_<j>_<k> maps tasks to concrete cores
(unrestricted and allocpow2 only); y_<j>_<jp> orders task pairs; s_<j> and
e_<j> are start and end times in seconds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .milp import MilpModel, Relation, SolveResult, Variable
from .taskmodel import (
    Machine,
    ProblemInstance,
    Task,
    build_groups,
    energy,
    is_power_of_two,
    offspring,
    runtime,
)


class SchedulerKind(Enum):
    UNRESTRICTED = "unrestricted"
    ALLOCPOW2 = "allocpow2"
    GROUP = "group"
    CROWN = "crown"


class InconsistentAssignmentError(Exception):
    """The solver assignment does not decode into a coherent schedule,
    which signals a tolerance breach rather than a modelling condition."""


@dataclass(frozen=True)
class ScheduleEntry:
    task: int
    cores: tuple[int, ...]
    level: int
    start: float
    end: float


@dataclass(frozen=True)
class Schedule:
    kind: SchedulerKind
    deadline: float
    entries: tuple[ScheduleEntry, ...]
    total_energy: float


def _x(i: int, j: int, k: int) -> str:
    return f"x_{i}_{j}_{k}"


def _z(core: int, j: int, k: int) -> str:
    return f"z_{core}_{j}_{k}"


def _y(j: int, jp: int) -> str:
    return f"y_{j}_{jp}"


def _add_ordering_variables(model: MilpModel, n: int, deadline: float) -> None:
    for j in range(n):
        for jp in range(n):
            # Self-precedence is forbidden, so the diagonal is pinned to 0.
            upper = 0.0 if j == jp else 1.0
            model.add_binary(_y(j, jp), 0.0, upper)
    for j in range(n):
        model.add_continuous(f"s_{j}", 0.0, deadline)
    for j in range(n):
        model.add_continuous(f"e_{j}", 0.0, deadline)


def _add_ordering_constraints(model: MilpModel, n: int, deadline: float) -> None:
    # At most one precedence direction per pair.
    for j in range(n):
        for jp in range(j):
            model.add_constraint({_y(j, jp): 1.0, _y(jp, j): 1.0}, Relation.LE, 1.0)
    # A task starts only after every task ordered before it has ended;
    # the deadline doubles as the big-M constant.
    for j in range(n):
        for jp in range(n):
            if jp == j:
                continue
            model.add_constraint(
                {f"s_{j}": 1.0, f"e_{jp}": -1.0, _y(jp, j): -deadline},
                Relation.GE,
                -deadline,
            )


def build_unrestricted(inst: ProblemInstance) -> MilpModel:
    """Scheduler with feasibility constraints only.

    2pnK binaries (x over widths, z over cores), n^2 ordering binaries and
    2n continuous time variables.
    """
    tasks = inst.tasks
    machine = inst.machine
    n, p, K = len(tasks), machine.core_count, machine.num_levels
    M = inst.deadline
    model = MilpModel()

    for w in range(1, p + 1):
        for j in range(n):
            for k in range(K):
                model.add_binary(_x(w, j, k))
    for core in range(p):
        for j in range(n):
            for k in range(K):
                model.add_binary(_z(core, j, k))
    _add_ordering_variables(model, n, M)

    model.set_objective(
        {
            _x(w, j, k): energy(tasks[j], w, k, machine)
            for w in range(1, p + 1)
            for j in range(n)
            for k in range(K)
        }
    )

    # Each task runs exactly once.
    for j in range(n):
        model.add_constraint(
            {_x(w, j, k): 1.0 for w in range(1, p + 1) for k in range(K)},
            Relation.EQ,
            1.0,
        )
    # End time = start time + selected per-core runtime.
    for j in range(n):
        coeffs = {f"e_{j}": 1.0, f"s_{j}": -1.0}
        for w in range(1, p + 1):
            for k in range(K):
                coeffs[_x(w, j, k)] = -runtime(tasks[j], w, machine.freq_levels[k])
        model.add_constraint(coeffs, Relation.EQ, 0.0)

    _add_ordering_constraints(model, n, M)

    # Tasks sharing a core need a precedence direction.
    for j in range(n):
        for jp in range(j):
            for core in range(p):
                coeffs = {_y(j, jp): 1.0, _y(jp, j): 1.0}
                for k in range(K):
                    coeffs[_z(core, j, k)] = -1.0
                    coeffs[_z(core, jp, k)] = -1.0
                model.add_constraint(coeffs, Relation.GE, -1.0)
    # Core mapping consistent with the selected width, per frequency level.
    for j in range(n):
        for k in range(K):
            coeffs = {_z(core, j, k): 1.0 for core in range(p)}
            for w in range(1, p + 1):
                coeffs[_x(w, j, k)] = -float(w)
            model.add_constraint(coeffs, Relation.EQ, 0.0)
    return model


def build_allocpow2(inst: ProblemInstance) -> MilpModel:
    """Unrestricted scheduler plus a ban on widths that are not powers of 2."""
    model = build_unrestricted(inst)
    n, p, K = len(inst.tasks), inst.machine.core_count, inst.machine.num_levels
    banned_widths = [w for w in range(1, p + 1) if not is_power_of_two(w)]
    banned_names: set[str] = set()
    for j in range(n):
        for w in banned_widths:
            names = [_x(w, j, k) for k in range(K)]
            banned_names.update(names)
            model.add_constraint({name: 1.0 for name in names}, Relation.EQ, 0.0)
    _pin_banned(model, banned_names)
    return model


def _pin_banned(model: MilpModel, names: set[str]) -> None:
    """Set the bounds of ban-row summands to [0, 0].

    The ban rows already force these binaries to zero (they are nonnegative
    and sum to zero), so the bounds add no constraint; they let the solver
    drop the columns instead of pivoting around their oversubscription-scale
    coefficients."""
    if not names:
        return
    model.variables = [
        Variable(v.name, v.kind, 0.0, 0.0) if v.name in names else v
        for v in model.variables
    ]


def build_group(inst: ProblemInstance) -> MilpModel:
    """Placement restricted to the binary tree of core groups.

    The x variables select a group instead of a width (the width becomes
    the group size), the z variables disappear, and the core-sharing
    constraint is asked group-wise: two tasks need an ordering whenever one
    of them sits in the other's group or any of its subgroups.
    """
    tasks = inst.tasks
    machine = inst.machine
    n, p, K = len(tasks), machine.core_count, machine.num_levels
    if not is_power_of_two(p):
        raise ValueError(f"group scheduler needs a power-of-2 core count, got {p}")
    M = inst.deadline
    groups = build_groups(p)
    off = [sorted(offspring(g.index, p)) for g in groups]
    model = MilpModel()

    for g in groups:
        for j in range(n):
            for k in range(K):
                model.add_binary(_x(g.index, j, k))
    _add_ordering_variables(model, n, M)

    model.set_objective(
        {
            _x(g.index, j, k): energy(tasks[j], g.size, k, machine)
            for g in groups
            for j in range(n)
            for k in range(K)
        }
    )

    for j in range(n):
        model.add_constraint(
            {_x(g.index, j, k): 1.0 for g in groups for k in range(K)},
            Relation.EQ,
            1.0,
        )
    for j in range(n):
        coeffs = {f"e_{j}": 1.0, f"s_{j}": -1.0}
        for g in groups:
            for k in range(K):
                coeffs[_x(g.index, j, k)] = -runtime(
                    tasks[j], g.size, machine.freq_levels[k]
                )
        model.add_constraint(coeffs, Relation.EQ, 0.0)

    _add_ordering_constraints(model, n, M)

    # Ordering requirement for nested placements.  Emitted for both ordered
    # pair directions: the row is asymmetric (exact group for j, offspring
    # sum for jp), so a single direction would leave the case "jp placed in
    # an ancestor group of j's" unordered.
    for j in range(n):
        for jp in range(n):
            if jp == j:
                continue
            for g in groups:
                coeffs = {_y(j, jp): 1.0, _y(jp, j): 1.0}
                for k in range(K):
                    coeffs[_x(g.index, j, k)] = coeffs.get(_x(g.index, j, k), 0.0) - 1.0
                for o in off[g.index]:
                    for k in range(K):
                        name = _x(o, jp, k)
                        coeffs[name] = coeffs.get(name, 0.0) - 1.0
                model.add_constraint(coeffs, Relation.GE, -1.0)
    return model


def build_crown(inst: ProblemInstance) -> MilpModel:
    """Crown scheduler: group placement with per-task width cap and a fixed
    larger-groups-first execution order, leaving only the x binaries."""
    tasks = inst.tasks
    machine = inst.machine
    n, p, K = len(tasks), machine.core_count, machine.num_levels
    if not is_power_of_two(p):
        raise ValueError(f"crown scheduler needs a power-of-2 core count, got {p}")
    M = inst.deadline
    groups = build_groups(p)
    model = MilpModel()

    for g in groups:
        for j in range(n):
            for k in range(K):
                model.add_binary(_x(g.index, j, k))

    model.set_objective(
        {
            _x(g.index, j, k): energy(tasks[j], g.size, k, machine)
            for g in groups
            for j in range(n)
            for k in range(K)
        }
    )

    for j in range(n):
        model.add_constraint(
            {_x(g.index, j, k): 1.0 for g in groups for k in range(K)},
            Relation.EQ,
            1.0,
        )
    # No group wider than the task's maximum width.
    banned_names: set[str] = set()
    for j in range(n):
        banned = {
            _x(g.index, j, k): 1.0
            for g in groups
            if g.size > tasks[j].max_width
            for k in range(K)
        }
        if banned:
            banned_names.update(banned)
            model.add_constraint(banned, Relation.EQ, 0.0)
    _pin_banned(model, banned_names)
    # Per-core load: everything scheduled on any group containing the core
    # must fit before the deadline.  Under the fixed crown order this is
    # exactly schedule feasibility.
    for core in range(p):
        coeffs: dict[str, float] = {}
        for g in groups:
            if not (g.first_core <= core < g.first_core + g.size):
                continue
            for j in range(n):
                for k in range(K):
                    coeffs[_x(g.index, j, k)] = runtime(
                        tasks[j], g.size, machine.freq_levels[k]
                    )
        model.add_constraint(coeffs, Relation.LE, M)
    return model


_BUILDERS = {
    SchedulerKind.UNRESTRICTED: build_unrestricted,
    SchedulerKind.ALLOCPOW2: build_allocpow2,
    SchedulerKind.GROUP: build_group,
    SchedulerKind.CROWN: build_crown,
}


def build_model(inst: ProblemInstance, kind: SchedulerKind) -> MilpModel:
    return _BUILDERS[kind](inst)


def _selected_option(
    assignment: dict[str, float], j: int, choices: list[tuple[str, int, int]]
) -> tuple[int, int]:
    """The unique (i, k) with x_i_j_k = 1 for task position j."""
    picked = [(i, k) for name, i, k in choices if assignment[name] > 0.5]
    if len(picked) != 1:
        raise InconsistentAssignmentError(
            f"task {j} has {len(picked)} selected width/level options"
        )
    return picked[0]


def extract_schedule(
    inst: ProblemInstance, kind: SchedulerKind, result: SolveResult
) -> Schedule:
    """Decode a solver result into concrete cores, levels, and times.

    Unrestricted/allocpow2 read cores from the z variables and times from
    s/e; group reads cores from the selected group and times from s/e; the
    crown order is reconstructed deterministically by processing groups
    from large to small (ties: group index, then task id) and placing each
    task at the accumulated frontier of its cores.
    """
    if result.assignment is None:
        raise ValueError("solver result carries no assignment")
    assignment = result.assignment
    tasks = inst.tasks
    machine = inst.machine
    n, p, K = len(tasks), machine.core_count, machine.num_levels

    entries: list[ScheduleEntry] = []
    if kind in (SchedulerKind.UNRESTRICTED, SchedulerKind.ALLOCPOW2):
        for j in range(n):
            choices = [
                (_x(w, j, k), w, k) for w in range(1, p + 1) for k in range(K)
            ]
            width, level = _selected_option(assignment, j, choices)
            cores = tuple(
                core for core in range(p) if assignment[_z(core, j, level)] > 0.5
            )
            if len(cores) != width:
                raise InconsistentAssignmentError(
                    f"task {j}: width {width} but {len(cores)} mapped cores"
                )
            start = max(0.0, assignment[f"s_{j}"])
            end = assignment[f"e_{j}"]
            entries.append(ScheduleEntry(tasks[j].id, cores, level, start, end))
    elif kind == SchedulerKind.GROUP:
        groups = build_groups(p)
        for j in range(n):
            choices = [
                (_x(g.index, j, k), g.index, k) for g in groups for k in range(K)
            ]
            gi, level = _selected_option(assignment, j, choices)
            cores = tuple(groups[gi].cores)
            start = max(0.0, assignment[f"s_{j}"])
            end = assignment[f"e_{j}"]
            entries.append(ScheduleEntry(tasks[j].id, cores, level, start, end))
    elif kind == SchedulerKind.CROWN:
        groups = build_groups(p)
        placed: list[tuple[int, int, int]] = []  # (group index, task position, level)
        for j in range(n):
            choices = [
                (_x(g.index, j, k), g.index, k) for g in groups for k in range(K)
            ]
            gi, level = _selected_option(assignment, j, choices)
            placed.append((gi, j, level))
        placed.sort(key=lambda t: (-groups[t[0]].size, t[0], tasks[t[1]].id))
        frontier = [0.0] * p
        for gi, j, level in placed:
            cores = tuple(groups[gi].cores)
            start = max(frontier[c] for c in cores)
            end = start + runtime(tasks[j], len(cores), machine.freq_levels[level])
            for c in cores:
                frontier[c] = end
            entries.append(ScheduleEntry(tasks[j].id, cores, level, start, end))
        entries.sort(key=lambda e: e.task)
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown scheduler kind {kind}")

    total = sum(
        energy(_task_by_id(tasks, e.task), len(e.cores), e.level, machine)
        for e in entries
    )
    if abs(total - result.objective) > 1e-6 * max(1.0, abs(result.objective)):
        raise InconsistentAssignmentError(
            f"schedule energy {total} deviates from objective {result.objective}"
        )
    return Schedule(kind, inst.deadline, tuple(entries), total)


def _task_by_id(tasks, task_id: int) -> Task:
    for t in tasks:
        if t.id == task_id:
            return t
    raise KeyError(f"no task with id {task_id}")


# --- schedule JSON -----------------------------------------------------------
#
# {"kind": str, "deadline_s": real, "total_energy_j": real,
#  "entries": [{"task": int, "cores": [int], "level": int,
#               "start_s": real, "end_s": real}, ...]}


def save_schedule(schedule: Schedule, path: str | Path) -> None:
    payload = {
        "kind": schedule.kind.value,
        "deadline_s": schedule.deadline,
        "total_energy_j": schedule.total_energy,
        "entries": [
            {
                "task": e.task,
                "cores": list(e.cores),
                "level": e.level,
                "start_s": e.start,
                "end_s": e.end,
            }
            for e in schedule.entries
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_schedule(path: str | Path) -> Schedule:
    data = json.loads(Path(path).read_text())
    try:
        entries = tuple(
            ScheduleEntry(
                task=int(e["task"]),
                cores=tuple(int(c) for c in e["cores"]),
                level=int(e["level"]),
                start=float(e["start_s"]),
                end=float(e["end_s"]),
            )
            for e in data["entries"]
        )
        return Schedule(
            kind=SchedulerKind(data["kind"]),
            deadline=float(data["deadline_s"]),
            entries=entries,
            total_energy=float(data["total_energy_j"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed schedule file {path}: {exc}") from exc
