"""Planner parameters, step outcomes and results."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import isfinite
from typing import Literal, Sequence

from aoplan.core.errors import ParameterError
from aoplan.metric.nn_index import MetricWeights
from aoplan.planners.tree import PlanTree, Solution

PlannerVariant = Literal["rrt", "ao_rrt", "ao_rrt_pruning", "multi_tree_ao", "hybrid", "sst"]
VARIANTS: tuple[str, ...] = ("rrt", "ao_rrt", "ao_rrt_pruning", "multi_tree_ao", "hybrid", "sst")

# CLI spellings of the variants.
VARIANT_ALIASES: dict[str, str] = {
    "rrt": "rrt",
    "ao-rrt": "ao_rrt",
    "ao-rrt-prune": "ao_rrt_pruning",
    "multi-tree": "multi_tree_ao",
    "hybrid": "hybrid",
    "sst": "sst",
}


def normalize_variant(name: str) -> str:
    variant = VARIANT_ALIASES.get(name, name)
    if variant not in VARIANTS:
        raise ParameterError(f"unknown planner {name!r}; expected one of {sorted(VARIANT_ALIASES)}")
    return variant


@dataclass(frozen=True, slots=True)
class PlannerParams:
    t_prop: float
    c_max: float
    iterations: int | None = None
    time_budget: float | None = None
    weights: MetricWeights = field(default_factory=MetricWeights)
    collision_resolution: float | None = None
    integrator_step: float | None = None
    adaptive_cmax: bool = True
    pruning: bool = False
    goal_bias: float = 0.05
    checkpoints: tuple[float, ...] = ()
    shrink_factor: float = 1.0
    max_rounds: int = 10
    delta_bn: float = 0.2
    delta_s: float = 0.1
    pln: str = "density"
    grid_cells: int = 10

    def __post_init__(self) -> None:
        if not (isfinite(self.t_prop) and self.t_prop > 0.0):
            raise ParameterError("t_prop must be positive")
        if not (isfinite(self.c_max) and self.c_max > 0.0):
            raise ParameterError("c_max must be positive")
        if self.iterations is None and self.time_budget is None:
            raise ParameterError("set iterations and/or time_budget")
        if self.iterations is not None and self.iterations < 0:
            raise ParameterError("iterations must be non-negative")
        if self.time_budget is not None and not self.time_budget >= 0.0:
            raise ParameterError("time_budget must be non-negative")
        if not 0.0 <= self.goal_bias < 1.0:
            raise ParameterError("goal_bias must lie in [0, 1)")
        if self.collision_resolution is not None and not self.collision_resolution > 0.0:
            raise ParameterError("collision_resolution must be positive")
        if not 0.0 < self.shrink_factor <= 1.0:
            raise ParameterError("shrink_factor must lie in (0, 1]")
        if self.max_rounds < 1:
            raise ParameterError("max_rounds must be at least 1")
        if not (self.delta_bn > 0.0 and self.delta_s > 0.0):
            raise ParameterError("delta_bn and delta_s must be positive")
        if self.grid_cells < 1:
            raise ParameterError("grid_cells must be at least 1")
        checkpoints = tuple(float(value) for value in self.checkpoints)
        if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
            raise ParameterError("checkpoints must be strictly increasing")
        object.__setattr__(self, "checkpoints", checkpoints)

    @property
    def by_time(self) -> bool:
        """Checkpoints are seconds when only a time budget is set."""

        return self.iterations is None

    def with_overrides(self, **changes: object) -> "PlannerParams":
        return replace(self, **{key: value for key, value in changes.items() if value is not None})


@dataclass(frozen=True, slots=True)
class StepOutcome:
    added: int | None = None
    reason: str | None = None
    improved: bool = False


@dataclass(frozen=True, slots=True)
class LogEntry:
    iteration: int
    elapsed_s: float
    best_cost: float | None
    nodes: int
    pruned: int


@dataclass(slots=True)
class PlanResult:
    variant: str
    best: Solution | None
    tree: PlanTree
    iterations: int = 0
    rejections: dict[str, int] = field(default_factory=dict)
    improvements: list[LogEntry] = field(default_factory=list)
    checkpoints: list[LogEntry] = field(default_factory=list)
    provenance: list[str] = field(default_factory=list)
    rounds: int = 1

    @property
    def success(self) -> bool:
        return self.best is not None

    @property
    def best_cost(self) -> float | None:
        return self.best.cost if self.best is not None else None

    @property
    def node_count(self) -> int:
        return len(self.tree)

    @property
    def pruned_count(self) -> int:
        return self.tree.pruned


def best_cost_series(entries: Sequence[LogEntry]) -> list[float | None]:
    return [entry.best_cost for entry in entries]
