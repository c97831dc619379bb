from __future__ import annotations

import numpy as np
import pytest

from aoplan.core.random_stream import RandomStream
from aoplan.core.types import AugmentedState, ControlSegment, GoalRegion
from aoplan.geometry.obstacles import Obstacle, ObstacleSet
from aoplan.metric.nn_index import MetricWeights
from aoplan.planners.ao_rrt import (
    PlannerContext,
    ao_rrt_plan,
    ao_rrt_step,
    rrt_baseline_step,
    rrt_plan,
    state_only_weights,
    update_cmax,
)
from aoplan.planners.params import PlannerParams, best_cost_series
from aoplan.planners.run import plan, verify_result
from aoplan.planners.tree import PlanTree
from aoplan.scenarios.model import Scenario
from aoplan.scenarios.oracles import scenario_oracle


def _node_table(tree: PlanTree) -> list[tuple]:
    return [(node.parent, node.y.x.tolist(), node.y.c) for node in tree.nodes]


def test_zero_iterations_returns_root_only(geo2d: Scenario) -> None:
    result = plan(geo2d, geo2d.planner_params(iterations=0), RandomStream(1))

    assert result.best is None
    assert result.iterations == 0
    assert len(result.tree) == 1


def test_start_inside_goal_is_a_zero_cost_solution(open_field: Scenario) -> None:
    scenario = Scenario(
        name="start_in_goal",
        system=open_field.system,
        obstacles=open_field.obstacles,
        x_init=[0.0, 0.0],
        goal=GoalRegion([0.2, 0.0], 0.5),
        defaults=open_field.defaults,
    )

    result = ao_rrt_plan(scenario, scenario.planner_params(iterations=0), RandomStream(1))

    assert result.best_cost == 0.0
    assert result.improvements[0].iteration == 0
    assert result.best.schedule == ()


def test_first_step_cost_equals_duration(open_field: Scenario) -> None:
    ctx = PlannerContext.create(open_field, open_field.planner_params(iterations=1), RandomStream(3))

    outcome = ao_rrt_step(ctx)

    assert len(ctx.tree) <= 2
    if outcome.added is not None:
        node = ctx.tree[outcome.added]
        assert node.y.c == pytest.approx(node.segment.duration, abs=1e-12)


def test_collision_leaves_tree_unchanged(open_field: Scenario) -> None:
    walled = Scenario(
        name="walled",
        system=open_field.system,
        obstacles=ObstacleSet((Obstacle.box([0.5, -1.0], [1.5, 1.0]),), open_field.system.state_bounds),
        x_init=[0.0, 0.0],
        goal=open_field.goal,
        defaults=open_field.defaults,
    )
    ctx = PlannerContext.create(walled, walled.planner_params(iterations=1), RandomStream(3))

    outcome = ctx.extend(0, np.array([1.0, 0.0]), 1.0, "ao")

    assert outcome.reason == "collision"
    assert len(ctx.tree) == 1
    assert len(ctx.index) == 1


def test_fixed_seed_replays_node_for_node(geo2d: Scenario) -> None:
    params = geo2d.planner_params(iterations=300)

    first = ao_rrt_plan(geo2d, params, RandomStream(42))
    second = ao_rrt_plan(geo2d, params, RandomStream(42))

    assert _node_table(first.tree) == _node_table(second.tree)
    assert first.rejections == second.rejections


def test_rrt_baseline_replays(geo2d: Scenario) -> None:
    params = geo2d.planner_params(iterations=300)

    first = rrt_plan(geo2d, params, RandomStream(42))
    second = rrt_plan(geo2d, params, RandomStream(42))

    assert _node_table(first.tree) == _node_table(second.tree)
    assert {node.tag for node in first.tree.nodes[1:]} <= {"rrt"}


def test_state_only_ao_rrt_matches_rrt_baseline(geo2d: Scenario) -> None:
    params = geo2d.planner_params(iterations=200, weights=MetricWeights(1.0, 0.0), adaptive_cmax=False)
    ao = PlannerContext.create(geo2d, params, RandomStream(8))
    rrt = PlannerContext.create(geo2d, params, RandomStream(8), weights=state_only_weights(params.weights))

    for _ in range(200):
        ao_rrt_step(ao)
        rrt_baseline_step(rrt)

    assert _node_table(ao.tree) == _node_table(rrt.tree)


def test_update_cmax_rules() -> None:
    params = PlannerParams(t_prop=1.0, c_max=25.0, iterations=1)
    tree = PlanTree(np.zeros(1))

    assert update_cmax(tree, None, params) == 25.0
    segment = ControlSegment([0.0], 1.0)
    tree.add(0, AugmentedState([1.0], 3.2), segment, None, "ao")
    tree.add(0, AugmentedState([2.0], 7.1), segment, None, "ao")
    assert update_cmax(tree, None, params) == 7.1
    assert update_cmax(tree, 5.0, params) == 5.0


def test_best_cost_is_non_increasing_and_verified(open_field: Scenario) -> None:
    params = open_field.planner_params(iterations=600, checkpoints=(100, 200, 400, 600))

    result = ao_rrt_plan(open_field, params, RandomStream(5))

    verify_result(open_field, params, result)
    assert result.success
    improvements = best_cost_series(result.improvements)
    assert improvements == sorted(improvements, reverse=True)
    assert len(set(improvements)) == len(improvements)
    found = [cost for cost in best_cost_series(result.checkpoints) if cost is not None]
    assert found == sorted(found, reverse=True)
    assert [entry.iteration for entry in result.checkpoints] == [100, 200, 400, 600]
    assert result.provenance == ["ao"] * 600


def test_pruning_keeps_only_nodes_below_best(open_field: Scenario) -> None:
    params = open_field.planner_params(iterations=800)

    result = plan(open_field, params, RandomStream(6), "ao-rrt-prune")

    verify_result(open_field, params, result)
    assert result.variant == "ao_rrt_pruning"
    assert result.success
    assert result.tree.max_live_cost() <= result.best_cost


def test_rejections_are_counted(geo2d: Scenario) -> None:
    result = ao_rrt_plan(geo2d, geo2d.planner_params(iterations=400), RandomStream(2))

    assert sum(result.rejections.values()) + len(result.tree) - 1 == 400
    assert set(result.rejections) <= {"collision"}


def test_reported_cost_respects_oracle_lower_bound(di1d: Scenario) -> None:
    params = di1d.planner_params(iterations=1500)
    bound = scenario_oracle(di1d).lower_bound

    for seed in range(3):
        result = ao_rrt_plan(di1d, params, RandomStream(seed))
        if result.best_cost is not None:
            assert result.best_cost >= bound - 1e-6


def test_time_budget_stops_the_run(geo2d: Scenario) -> None:
    params = geo2d.planner_params(time_budget=0.05, checkpoints=(0.01, 10.0))

    result = ao_rrt_plan(geo2d, params, RandomStream(1))

    assert result.iterations > 0
    assert len(result.checkpoints) == 2
    assert result.checkpoints[-1].iteration == result.iterations


def test_iteration_checkpoints_carry_wallclock_time(geo2d: Scenario) -> None:
    params = geo2d.planner_params(iterations=400, checkpoints=(1, 100, 200, 400))

    result = ao_rrt_plan(geo2d, params, RandomStream(3))

    elapsed = [entry.elapsed_s for entry in result.checkpoints]
    assert elapsed == sorted(elapsed)
    assert elapsed[-1] > elapsed[0] > 0.0
