"""Energy-minimal exact scheduling of independent moldable tasks on
frequency-scalable multicores, with four progressively constrained ILP
schedulers, a bundled branch-and-bound solver, and a benchmark harness."""

from .taskmodel import (
    CoreGroup,
    Machine,
    ProblemInstance,
    Task,
    build_groups,
    deadline,
    efficiency,
    energy,
    generate_taskset,
    groups_of_core,
    offspring,
    runtime,
)

__version__ = "0.1.0"

__all__ = [
    "CoreGroup",
    "Machine",
    "ProblemInstance",
    "Task",
    "build_groups",
    "deadline",
    "efficiency",
    "energy",
    "generate_taskset",
    "groups_of_core",
    "offspring",
    "runtime",
    "__version__",
]
