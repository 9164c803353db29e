"""Independent schedule feasibility checking, energy recomputation, and a
brute-force optimum oracle for tiny instances.

Tolerances mirror the solver's (1e-6 absolute on times, 1e-6 relative on
energy) so the validator and the solver never disagree on boundary cases.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

from .schedulers import Schedule, SchedulerKind
from .taskmodel import (
    ProblemInstance,
    build_groups,
    energy,
    is_power_of_two,
    runtime,
)

TIME_TOL = 1e-6
ENERGY_REL_TOL = 1e-6

# Enumeration budget: beyond this the option space is no longer desk-sized.
ORACLE_MAX_TASKS = 5
ORACLE_MAX_CORES = 4
ORACLE_MAX_LEVELS = 3


class BudgetExceededError(Exception):
    """The instance is too large for exhaustive enumeration."""


class ViolationKind(Enum):
    DEADLINE_EXCEEDED = "DeadlineExceeded"
    OVERLAP = "Overlap"
    BAD_WIDTH = "BadWidth"
    NEGATIVE_START = "NegativeStart"
    DUPLICATE_TASK = "DuplicateTask"
    ENERGY_MISMATCH = "EnergyMismatch"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    detail: str
    tasks: tuple[int, ...]
    magnitude: float

    def __str__(self) -> str:
        return f"{self.kind.value}: {self.detail}"


def recompute_energy(schedule: Schedule, inst: ProblemInstance) -> float:
    """Total energy of the schedule from the instance data alone."""
    by_id = {t.id: t for t in inst.tasks}
    return sum(
        energy(by_id[e.task], len(e.cores), e.level, inst.machine)
        for e in schedule.entries
    )


def validate(schedule: Schedule, inst: ProblemInstance) -> list[Violation]:
    """All feasibility violations of ``schedule`` against ``inst``.

    Checks cardinality (every task exactly once), the [0, deadline] window,
    duration consistency with width and level, pairwise non-overlap on
    shared cores, and the stated total energy.  Widths beyond a task's
    maximum stay legal; they only surface through the window and duration
    checks.  An empty list means the schedule is feasible.
    """
    by_id = {t.id: t for t in inst.tasks}
    machine = inst.machine
    M = schedule.deadline
    out: list[Violation] = []

    counts: dict[int, int] = {t.id: 0 for t in inst.tasks}
    for e in schedule.entries:
        if e.task not in by_id:
            raise ValueError(f"schedule refers to unknown task {e.task}")
        counts[e.task] += 1
        if any(c < 0 or c >= machine.core_count for c in e.cores):
            raise ValueError(f"task {e.task} refers to cores outside the machine")
        if not 0 <= e.level < machine.num_levels:
            raise ValueError(f"task {e.task} refers to level {e.level} outside the machine")
    for tid, cnt in counts.items():
        if cnt != 1:
            out.append(
                Violation(
                    ViolationKind.DUPLICATE_TASK,
                    f"task {tid} appears {cnt} times",
                    (tid,),
                    float(abs(cnt - 1)),
                )
            )

    for e in schedule.entries:
        width = len(set(e.cores))
        if len(e.cores) < 1 or width != len(e.cores):
            out.append(
                Violation(
                    ViolationKind.BAD_WIDTH,
                    f"task {e.task} has a bad core set {list(e.cores)}",
                    (e.task,),
                    1.0,
                )
            )
            continue
        if e.start < -TIME_TOL:
            out.append(
                Violation(
                    ViolationKind.NEGATIVE_START,
                    f"task {e.task} starts at {e.start:.9g}",
                    (e.task,),
                    -e.start,
                )
            )
        if e.end > M + TIME_TOL:
            out.append(
                Violation(
                    ViolationKind.DEADLINE_EXCEEDED,
                    f"task {e.task} ends at {e.end:.9g} > deadline {M:.9g}",
                    (e.task,),
                    e.end - M,
                )
            )
        expected = runtime(by_id[e.task], width, machine.freq_levels[e.level])
        drift = abs((e.end - e.start) - expected)
        if drift > TIME_TOL:
            out.append(
                Violation(
                    ViolationKind.BAD_WIDTH,
                    f"task {e.task} duration {e.end - e.start:.9g} does not match "
                    f"runtime {expected:.9g} on {width} cores",
                    (e.task,),
                    drift,
                )
            )

    for a, b in itertools.combinations(schedule.entries, 2):
        if not set(a.cores) & set(b.cores):
            continue
        overlap = min(a.end, b.end) - max(a.start, b.start)
        if overlap > TIME_TOL:
            out.append(
                Violation(
                    ViolationKind.OVERLAP,
                    f"tasks {a.task} and {b.task} overlap by {overlap:.9g}s "
                    "on shared cores",
                    (a.task, b.task),
                    overlap,
                )
            )

    recomputed = recompute_energy(schedule, inst)
    drift = abs(recomputed - schedule.total_energy)
    if drift > ENERGY_REL_TOL * max(1.0, abs(recomputed)):
        out.append(
            Violation(
                ViolationKind.ENERGY_MISMATCH,
                f"stated energy {schedule.total_energy:.9g} J vs recomputed "
                f"{recomputed:.9g} J",
                (),
                drift,
            )
        )
    return out


# --- exhaustive optimum oracle ------------------------------------------------


@dataclass(frozen=True)
class _Option:
    energy: float
    runtime: float
    cores: tuple[int, ...]


def _options_for_task(inst: ProblemInstance, kind: SchedulerKind, j: int) -> list[_Option]:
    task = inst.tasks[j]
    machine = inst.machine
    p = machine.core_count
    opts: list[_Option] = []
    if kind in (SchedulerKind.UNRESTRICTED, SchedulerKind.ALLOCPOW2):
        for w in range(1, p + 1):
            if kind == SchedulerKind.ALLOCPOW2 and not is_power_of_two(w):
                continue
            for cores in itertools.combinations(range(p), w):
                for k in range(machine.num_levels):
                    opts.append(
                        _Option(
                            energy(task, w, k, machine),
                            runtime(task, w, machine.freq_levels[k]),
                            cores,
                        )
                    )
    else:
        for g in build_groups(p):
            if kind == SchedulerKind.CROWN and g.size > task.max_width:
                continue
            for k in range(machine.num_levels):
                opts.append(
                    _Option(
                        energy(task, g.size, k, machine),
                        runtime(task, g.size, machine.freq_levels[k]),
                        tuple(g.cores),
                    )
                )
    # Options that cannot fit the deadline on their own can never appear in
    # a feasible assignment; dropping them keeps the search small.
    opts = [o for o in opts if o.runtime <= inst.deadline + TIME_TOL]
    opts.sort(key=lambda o: (o.energy, o.runtime, o.cores))
    return opts


def _orderable(chosen: list[_Option], p: int, deadline: float) -> bool:
    """Whether some execution order fits the deadline when every task starts
    greedily at the latest frontier of its cores.  Exact: replaying any
    feasible schedule in start-time order never delays a task."""
    n = len(chosen)
    for perm in itertools.permutations(range(n)):
        frontier = [0.0] * p
        ok = True
        for j in perm:
            opt = chosen[j]
            start = max(frontier[c] for c in opt.cores)
            end = start + opt.runtime
            if end > deadline + TIME_TOL:
                ok = False
                break
            for c in opt.cores:
                frontier[c] = end
        if ok:
            return True
    return False


def oracle_optimal(inst: ProblemInstance, kind: SchedulerKind) -> float:
    """Exact optimal energy of the scheduler variant by exhaustive search,
    math.inf when the variant has no feasible schedule.

    For the ordered variants an assignment counts as feasible when some
    task permutation placed greedily meets the deadline; for the crown the
    fixed order makes per-core load the exact criterion.
    """
    n = len(inst.tasks)
    machine = inst.machine
    if (
        n > ORACLE_MAX_TASKS
        or machine.core_count > ORACLE_MAX_CORES
        or machine.num_levels > ORACLE_MAX_LEVELS
    ):
        raise BudgetExceededError(
            f"oracle budget is n<={ORACLE_MAX_TASKS}, p<={ORACLE_MAX_CORES}, "
            f"K<={ORACLE_MAX_LEVELS}; got n={n}, p={machine.core_count}, "
            f"K={machine.num_levels}"
        )
    if kind in (SchedulerKind.GROUP, SchedulerKind.CROWN) and not is_power_of_two(
        machine.core_count
    ):
        raise ValueError("group/crown oracles need a power-of-2 core count")

    options = [_options_for_task(inst, kind, j) for j in range(n)]
    if any(not opts for opts in options):
        return math.inf
    min_tail = [0.0] * (n + 1)
    for j in range(n - 1, -1, -1):
        min_tail[j] = min_tail[j + 1] + options[j][0].energy

    p = machine.core_count
    M = inst.deadline
    best = math.inf
    chosen: list[_Option] = []

    if kind == SchedulerKind.CROWN:
        loads = [0.0] * p

        def descend_crown(j: int, partial: float) -> None:
            nonlocal best
            if partial + min_tail[j] >= best:
                return
            if j == n:
                best = partial
                return
            for opt in options[j]:
                if partial + opt.energy + min_tail[j + 1] >= best:
                    break
                if any(loads[c] + opt.runtime > M + TIME_TOL for c in opt.cores):
                    continue
                for c in opt.cores:
                    loads[c] += opt.runtime
                descend_crown(j + 1, partial + opt.energy)
                for c in opt.cores:
                    loads[c] -= opt.runtime
        descend_crown(0, 0.0)
        return best

    def descend(j: int, partial: float) -> None:
        nonlocal best
        if partial + min_tail[j] >= best:
            return
        if j == n:
            if _orderable(chosen, p, M):
                best = partial
            return
        for opt in options[j]:
            if partial + opt.energy + min_tail[j + 1] >= best:
                break
            chosen.append(opt)
            descend(j + 1, partial + opt.energy)
            chosen.pop()

    descend(0, 0.0)
    return best
