"""Problem instances: system, obstacles, start, goal and planner defaults."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from aoplan.core.errors import InvalidScenarioError
from aoplan.core.types import GoalRegion, State, as_state
from aoplan.dynamics.integrate import IntegratorConfig
from aoplan.dynamics.systems import AugmentedSystem, SystemDefinition
from aoplan.geometry.obstacles import ObstacleSet, is_free
from aoplan.metric.nn_index import MetricWeights
from aoplan.planners.params import PlannerParams


@dataclass(frozen=True, slots=True)
class ScenarioDefaults:
    t_prop: float
    c_max: float
    w_x: float = 1.0
    w_c: float = 1.0
    resolution: float | None = None
    integrator_step: float | None = None
    goal_bias: float = 0.05


@dataclass(frozen=True, slots=True)
class Scenario:
    name: str
    system: SystemDefinition
    obstacles: ObstacleSet
    x_init: State
    goal: GoalRegion
    defaults: ScenarioDefaults
    oracle: str | None = None
    description: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_init", as_state(self.x_init))
        self.validate()

    def validate(self) -> None:
        system = self.system
        bounds = system.state_bounds
        if self.x_init.size != system.state_dim:
            raise InvalidScenarioError(
                f"x_init has dimension {self.x_init.size}, system expects {system.state_dim}"
            )
        if not (
            np.array_equal(self.obstacles.state_bounds.lo, bounds.lo)
            and np.array_equal(self.obstacles.state_bounds.hi, bounds.hi)
        ):
            raise InvalidScenarioError("obstacle set and system disagree on state bounds")
        goal = self.goal
        if max(goal.projection) >= system.state_dim:
            raise InvalidScenarioError(f"goal.projection {goal.projection} exceeds state dimension")
        if goal.center.size not in (len(goal.projection), system.state_dim):
            raise InvalidScenarioError("goal.center must be a full state or match goal.projection")
        indices = list(goal.projection)
        center = goal.projected_center
        if not (np.all(center > bounds.lo[indices]) and np.all(center < bounds.hi[indices])):
            raise InvalidScenarioError("goal.center lies outside the state bounds")
        if not is_free(self.x_init, self.obstacles):
            raise InvalidScenarioError("x_init not in free space")
        system.spot_check(np.random.default_rng(0))

    @property
    def augmented(self) -> AugmentedSystem:
        return AugmentedSystem(self.system)

    @property
    def weights(self) -> MetricWeights:
        return MetricWeights(self.defaults.w_x, self.defaults.w_c)

    def integrator(self, params: PlannerParams) -> IntegratorConfig:
        step = params.integrator_step if params.integrator_step is not None else self.defaults.integrator_step
        return IntegratorConfig.for_horizon(params.t_prop, step)

    def planner_params(self, **overrides: Any) -> PlannerParams:
        """Scenario defaults with ``overrides`` applied (``None`` values ignored)."""

        defaults = self.defaults
        values: dict[str, Any] = {
            "t_prop": defaults.t_prop,
            "c_max": defaults.c_max,
            "weights": self.weights,
            "collision_resolution": defaults.resolution,
            "integrator_step": defaults.integrator_step,
            "goal_bias": defaults.goal_bias,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        if "iterations" not in values and "time_budget" not in values:
            values["iterations"] = 0
        return PlannerParams(**values)
