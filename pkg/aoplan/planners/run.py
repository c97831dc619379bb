"""Variant dispatch and post-run verification."""

from __future__ import annotations

import logging
from typing import Callable, Sequence

import numpy as np

from aoplan.core.errors import TrajectoryValidationError
from aoplan.core.random_stream import RandomStream
from aoplan.core.types import AugmentedState, ControlSegment, Trajectory, in_goal
from aoplan.dynamics.integrate import IntegratorConfig
from aoplan.geometry.obstacles import collision_free
from aoplan.planners.ao_rrt import ao_rrt_plan, rrt_plan
from aoplan.planners.hybrid import hybrid_plan
from aoplan.planners.multi_tree import multi_tree_plan
from aoplan.planners.params import PlannerParams, PlanResult, normalize_variant
from aoplan.planners.sst import sst_plan
from aoplan.planners.tree import replay_schedule
from aoplan.scenarios.model import Scenario

logger = logging.getLogger(__name__)

PlanFn = Callable[[Scenario, PlannerParams, RandomStream], PlanResult]


def _ao_rrt(scenario: Scenario, params: PlannerParams, stream: RandomStream) -> PlanResult:
    return ao_rrt_plan(scenario, params.with_overrides(pruning=False), stream)


def _ao_rrt_pruning(scenario: Scenario, params: PlannerParams, stream: RandomStream) -> PlanResult:
    return ao_rrt_plan(scenario, params.with_overrides(pruning=True), stream, variant="ao_rrt_pruning")


PLANNERS: dict[str, PlanFn] = {
    "rrt": rrt_plan,
    "ao_rrt": _ao_rrt,
    "ao_rrt_pruning": _ao_rrt_pruning,
    "multi_tree_ao": multi_tree_plan,
    "hybrid": hybrid_plan,
    "sst": sst_plan,
}


def plan(scenario: Scenario, params: PlannerParams, stream: RandomStream, variant: str = "ao_rrt") -> PlanResult:
    """Run one planner variant until its iteration cap or time budget."""

    variant = normalize_variant(variant)
    scenario.validate()
    result = PLANNERS[variant](scenario, params, stream)
    logger.debug(
        "%s on %s: %d iterations, %d live nodes, best %s",
        variant,
        scenario.name,
        result.iterations,
        result.node_count,
        result.best_cost,
    )
    return result


def replay_solution(
    scenario: Scenario,
    schedule: Sequence[ControlSegment],
    cfg: IntegratorConfig,
) -> tuple[AugmentedState, Trajectory]:
    return replay_schedule(scenario.x_init, schedule, scenario.augmented, cfg)


def verify_result(scenario: Scenario, params: PlannerParams, result: PlanResult) -> None:
    """Recompute the tree bookkeeping and replay the returned schedule.

    Raises :class:`TrajectoryValidationError` on any mismatch.
    """

    cfg = scenario.integrator(params)
    result.tree.verify(scenario.augmented, cfg)
    best = result.best
    if best is None:
        return
    y_end, trajectory = replay_solution(scenario, best.schedule, cfg)
    if y_end.c != best.cost or trajectory.cost != best.trajectory.cost:
        raise TrajectoryValidationError(f"replayed cost {y_end.c!r} differs from reported {best.cost!r}")
    if not (
        np.array_equal(trajectory.times, best.trajectory.times)
        and np.array_equal(trajectory.states, best.trajectory.states)
    ):
        raise TrajectoryValidationError("replayed trajectory differs from the reported one")
    if not in_goal(y_end.x, scenario.goal):
        raise TrajectoryValidationError("replayed schedule does not end in the goal region")
    resolution = params.collision_resolution or cfg.step
    if not collision_free(trajectory, scenario.obstacles, resolution):
        raise TrajectoryValidationError("replayed trajectory is not collision free")
