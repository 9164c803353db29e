"""Domain model: tasks, machines, core groups, and the closed-form formulas.

Workloads are measured in gigacycles and frequencies in GHz, so per-core
runtimes come out in seconds and energies (watts times seconds) in joules.
All types are immutable after construction and every operation here is a
pure function, so everything is safe to share across threads.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

# Parallel efficiency charged to a task spread over more cores than its
# maximum width.  Small but nonzero, so oversized allocations stay legal
# yet are never worth their energy.
OVERSUBSCRIBED_EFFICIENCY = 1e-6

FREQ_MIN_GHZ = 0.6
FREQ_MAX_GHZ = 1.6

# Candidate maximum widths for generated tasks and the per-core workload
# floor that prunes them: width w is admissible only while workload/w > 25.
_WIDTH_CHOICES = (1, 2, 4, 8)
_MIN_CYCLES_PER_CORE = 25


def is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


@dataclass(frozen=True)
class Task:
    """One moldable task: ``workload`` gigacycles, parallelizable on up to
    ``max_width`` cores (the core count is fixed before the task starts)."""

    id: int
    workload: int
    max_width: int

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError(f"task id must be >= 0, got {self.id}")
        if self.workload < 1:
            raise ValueError(f"task workload must be >= 1, got {self.workload}")
        if self.max_width < 1:
            raise ValueError(f"task max_width must be >= 1, got {self.max_width}")


# A task set is an ordered sequence of tasks; position in the sequence is
# the model index, Task.id is the external identity.
TaskSet = Sequence[Task]


@dataclass(frozen=True)
class Machine:
    """Homogeneous multicore with per-core DVFS.

    ``freq_levels`` are the discrete operating frequencies in GHz, strictly
    increasing; ``power`` is the per-core power draw in watts at each
    level, also strictly increasing.
    """

    core_count: int
    freq_levels: tuple[float, ...]
    power: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.core_count < 1:
            raise ValueError(f"core_count must be >= 1, got {self.core_count}")
        if len(self.freq_levels) < 1:
            raise ValueError("machine needs at least one frequency level")
        if len(self.freq_levels) != len(self.power):
            raise ValueError("freq_levels and power must have equal length")
        if any(f <= 0 for f in self.freq_levels) or any(w <= 0 for w in self.power):
            raise ValueError("frequencies and powers must be positive")
        if any(a >= b for a, b in zip(self.freq_levels, self.freq_levels[1:])):
            raise ValueError("freq_levels must be strictly increasing")
        if any(a >= b for a, b in zip(self.power, self.power[1:])):
            raise ValueError("power must be strictly increasing with frequency")

    @property
    def num_levels(self) -> int:
        return len(self.freq_levels)

    @property
    def f_min(self) -> float:
        return self.freq_levels[0]

    @property
    def f_max(self) -> float:
        return self.freq_levels[-1]

    @staticmethod
    def default_power(freqs: Iterable[float]) -> tuple[float, ...]:
        """Cubic dynamic-power model: Pow(f) = f**3 watts for f in GHz."""
        return tuple(f**3 for f in freqs)

    @classmethod
    def default(cls, core_count: int, num_levels: int = 6) -> "Machine":
        """Machine with ``num_levels`` evenly spaced levels in 0.6..1.6 GHz
        and the cubic power model."""
        if num_levels < 1:
            raise ValueError("num_levels must be >= 1")
        if num_levels == 1:
            freqs: tuple[float, ...] = (FREQ_MAX_GHZ,)
        else:
            span = FREQ_MAX_GHZ - FREQ_MIN_GHZ
            freqs = tuple(
                FREQ_MIN_GHZ + i * span / (num_levels - 1) for i in range(num_levels)
            )
        return cls(core_count, freqs, cls.default_power(freqs))


@dataclass(frozen=True)
class CoreGroup:
    """Aligned power-of-2 block of consecutive cores; node of the group tree."""

    index: int
    first_core: int
    size: int

    @property
    def cores(self) -> range:
        return range(self.first_core, self.first_core + self.size)


@dataclass(frozen=True)
class ProblemInstance:
    """A task set, the machine it runs on, and the common deadline in seconds."""

    tasks: tuple[Task, ...]
    machine: Machine
    deadline: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if self.deadline <= 0:
            raise ValueError(f"deadline must be positive, got {self.deadline}")
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise ValueError("task ids must be unique within an instance")


def efficiency(task: Task, q: int) -> float:
    """Parallel efficiency of ``task`` on ``q`` cores.

    1 on a single core, quadratically penalized up to the task's maximum
    width, and OVERSUBSCRIBED_EFFICIENCY beyond it.
    """
    if q < 1:
        raise ValueError(f"core count must be >= 1, got {q}")
    if q == 1:
        return 1.0
    if q <= task.max_width:
        return 1.0 - 0.3 * q * q / (task.max_width * task.max_width)
    return OVERSUBSCRIBED_EFFICIENCY


def runtime(task: Task, width: int, freq: float) -> float:
    """Per-core runtime in seconds of ``task`` on ``width`` cores at ``freq`` GHz."""
    if freq <= 0:
        raise ValueError(f"frequency must be positive, got {freq}")
    return task.workload / (freq * width * efficiency(task, width))


def energy(task: Task, width: int, level: int, machine: Machine) -> float:
    """Energy in joules: per-core runtime times per-core power times width."""
    if not 0 <= level < machine.num_levels:
        raise ValueError(f"frequency level {level} outside [0, {machine.num_levels})")
    return runtime(task, width, machine.freq_levels[level]) * machine.power[level] * width


def deadline(tasks: TaskSet, machine: Machine, d: float) -> float:
    """Deadline in seconds: ``d`` times the mean of the all-cores makespan
    at maximum frequency and twice the one at minimum frequency."""
    if d <= 0:
        raise ValueError(f"deadline factor must be positive, got {d}")
    total = sum(t.workload for t in tasks)
    p = machine.core_count
    return d * (total / (p * machine.f_max) + 2.0 * total / (p * machine.f_min)) / 2.0


def generate_taskset(n: int, seed: int) -> tuple[Task, ...]:
    """Deterministic synthetic task set of ``n`` tasks.

    Workloads are uniform integers in [1, 100]; the maximum width is drawn
    uniformly from the power-of-2 widths leaving more than 25 gigacycles
    per core, falling back to 1 when no width qualifies.
    """
    if n < 1:
        raise ValueError(f"task count must be >= 1, got {n}")
    rng = random.Random(seed)
    tasks = []
    for j in range(n):
        workload = rng.randint(1, 100)
        admissible = [w for w in _WIDTH_CHOICES if workload / w > _MIN_CYCLES_PER_CORE]
        if not admissible:
            admissible = [1]
        tasks.append(Task(id=j, workload=workload, max_width=rng.choice(admissible)))
    return tuple(tasks)


def build_groups(p: int) -> list[CoreGroup]:
    """The 2p-1 core groups over ``p`` cores in breadth-first order.

    Group 0 spans all cores; the children of group i are groups 2i+1
    (lower half) and 2i+2 (upper half); the last p groups are single cores.
    """
    if not is_power_of_two(p):
        raise ValueError(f"core count must be a power of 2, got {p}")
    groups = [CoreGroup(0, 0, p)]
    for i in range(p - 1):
        parent = groups[i]
        half = parent.size // 2
        groups.append(CoreGroup(2 * i + 1, parent.first_core, half))
        groups.append(CoreGroup(2 * i + 2, parent.first_core + half, half))
    return groups


def offspring(i: int, p: int) -> set[int]:
    """Indices of all groups contained in group ``i``, including ``i`` itself."""
    total = 2 * p - 1
    if not 0 <= i < total:
        raise ValueError(f"group index {i} outside [0, {total})")
    out: set[int] = set()
    stack = [i]
    while stack:
        g = stack.pop()
        out.add(g)
        left, right = 2 * g + 1, 2 * g + 2
        if left < total:
            stack.append(left)
        if right < total:
            stack.append(right)
    return out


def groups_of_core(l: int, p: int) -> set[int]:
    """Indices of the groups core ``l`` belongs to: the root-to-leaf path."""
    if not is_power_of_two(p):
        raise ValueError(f"core count must be a power of 2, got {p}")
    if not 0 <= l < p:
        raise ValueError(f"core index {l} outside [0, {p})")
    g = p - 1 + l  # leaf of core l in breadth-first numbering
    out = {g}
    while g > 0:
        g = (g - 1) // 2
        out.add(g)
    return out


# --- JSON file formats -------------------------------------------------------
#
# Task-set file:  {"tasks": [{"id": int, "workload": int, "max_width": int}, ...]}
# Machine file:   {"cores": int, "freq_ghz": [...], "power_w": [...]}
#                 ("power_w" optional; defaults to the cubic model)


def save_tasks(tasks: TaskSet, path: str | Path) -> None:
    payload = {
        "tasks": [
            {"id": t.id, "workload": t.workload, "max_width": t.max_width}
            for t in tasks
        ]
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_tasks(path: str | Path) -> tuple[Task, ...]:
    data = json.loads(Path(path).read_text())
    try:
        entries = data["tasks"]
        return tuple(
            Task(id=int(e["id"]), workload=int(e["workload"]), max_width=int(e["max_width"]))
            for e in entries
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed task file {path}: {exc}") from exc


def save_machine(machine: Machine, path: str | Path) -> None:
    payload = {
        "cores": machine.core_count,
        "freq_ghz": list(machine.freq_levels),
        "power_w": list(machine.power),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_machine(path: str | Path) -> Machine:
    data = json.loads(Path(path).read_text())
    try:
        cores = int(data["cores"])
        freqs = tuple(float(f) for f in data["freq_ghz"])
        if "power_w" in data and data["power_w"] is not None:
            power = tuple(float(w) for w in data["power_w"])
        else:
            power = Machine.default_power(freqs)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed machine file {path}: {exc}") from exc
    return Machine(cores, freqs, power)
