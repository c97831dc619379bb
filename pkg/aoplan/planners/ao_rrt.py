"""Single-tree AO-RRT, the kinodynamic RRT baseline and the shared run loop.

One iteration samples ``(x_rand, c_rand)``, finds the nearest tree vertex in
the weighted state-cost metric, propagates a random control for a random
duration and keeps the result if the trajectory is collision free.  The RRT
baseline is the same iteration with the cost coordinate removed from the
metric and no cost draw.
"""

from __future__ import annotations

import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from aoplan.config import get_settings
from aoplan.core.errors import PropagationDivergedError, TrajectoryValidationError
from aoplan.core.random_stream import RandomStream
from aoplan.core.types import AugmentedState, in_goal
from aoplan.dynamics.integrate import IntegratorConfig, propagate_augmented
from aoplan.dynamics.systems import AugmentedSystem
from aoplan.geometry.obstacles import collision_free
from aoplan.metric.nn_index import MetricWeights, NnIndex
from aoplan.planners.params import LogEntry, PlannerParams, PlanResult, StepOutcome
from aoplan.planners.sampling import sample_control, sample_cost, sample_duration, sample_target
from aoplan.planners.tree import PlanTree
from aoplan.scenarios.model import Scenario

logger = logging.getLogger(__name__)

StepFn = Callable[[int], StepOutcome]


@dataclass(slots=True)
class PlannerContext:
    """Everything one single-threaded planner run mutates."""

    scenario: Scenario
    params: PlannerParams
    stream: RandomStream
    tree: PlanTree
    index: NnIndex
    system: AugmentedSystem
    integrator: IntegratorConfig
    resolution: float
    c_max: float
    best: int | None = None
    cost_bound: float | None = None
    goal_ceiling: float | None = None
    on_add: Callable[[int], None] | None = None
    rejections: Counter = field(default_factory=Counter)

    @classmethod
    def create(
        cls,
        scenario: Scenario,
        params: PlannerParams,
        stream: RandomStream,
        *,
        weights: MetricWeights | None = None,
        cost_bound: float | None = None,
        goal_ceiling: float | None = None,
        rejections: Counter | None = None,
    ) -> "PlannerContext":
        integrator = scenario.integrator(params)
        tree = PlanTree(scenario.x_init)
        index = NnIndex(weights or params.weights)
        index.insert(0, tree.root.y)
        ctx = cls(
            scenario=scenario,
            params=params,
            stream=stream,
            tree=tree,
            index=index,
            system=scenario.augmented,
            integrator=integrator,
            resolution=params.collision_resolution or integrator.step,
            c_max=cost_bound if cost_bound is not None else params.c_max,
            cost_bound=cost_bound,
            goal_ceiling=goal_ceiling,
            rejections=rejections if rejections is not None else Counter(),
        )
        if in_goal(scenario.x_init, scenario.goal):
            logger.debug("x_init lies in the goal region; zero-cost solution at initialization")
            ctx.best = 0
        return ctx

    @property
    def best_cost(self) -> float | None:
        return self.tree[self.best].y.c if self.best is not None else None

    def extend(self, near: int, u: np.ndarray, duration: float, tag: str) -> StepOutcome:
        """Propagate from ``near`` and add the result if it passes every gate."""

        parent = self.tree[near]
        try:
            y_new, trajectory = propagate_augmented(parent.y, u, duration, self.system, self.integrator)
        except PropagationDivergedError:
            return StepOutcome(reason="diverged")
        if not collision_free(trajectory, self.scenario.obstacles, self.resolution):
            return StepOutcome(reason="collision")
        if self.cost_bound is not None and y_new.c > self.cost_bound:
            return StepOutcome(reason="cost-bound")
        best_cost = self.best_cost
        if self.params.pruning and best_cost is not None and y_new.c > best_cost:
            return StepOutcome(reason="pruned")
        node_id = self.tree.add(near, y_new, trajectory.segments[0], trajectory, tag)
        self.index.insert(node_id, y_new)
        if self.on_add is not None:
            self.on_add(node_id)
        improved = in_goal(y_new.x, self.scenario.goal) and (best_cost is None or y_new.c < best_cost)
        if improved and self.goal_ceiling is not None and not y_new.c < self.goal_ceiling:
            improved = False
        if improved:
            self.best = node_id
            logger.debug("new best cost %.6g at node %d (%d live nodes)", y_new.c, node_id, len(self.tree))
            if self.params.pruning:
                prune(self.tree, self.index, y_new.c)
        return StepOutcome(added=node_id, improved=improved)


def update_cmax(tree: PlanTree, current_best: float | None, params: PlannerParams) -> float:
    """Adaptive cost-sampling bound.

    The best solution cost once one exists; before that the largest live node
    cost, falling back to ``params.c_max`` while the tree holds only the root.
    """

    if current_best is not None:
        return current_best
    c_max = tree.max_live_cost()
    return c_max if c_max > 0.0 else params.c_max


def prune(tree: PlanTree, index: NnIndex, c_best: float) -> int:
    """Drop every node costlier than ``c_best`` from the tree and the index."""

    removed = tree.prune_above(c_best)
    from_index = index.remove_above_cost(c_best)
    if from_index != len(removed):
        raise TrajectoryValidationError(
            f"pruning removed {len(removed)} tree nodes but {from_index} index entries"
        )
    if removed:
        logger.debug("pruned %d nodes above cost %.6g", len(removed), c_best)
    return len(removed)


def ao_rrt_step(ctx: PlannerContext) -> StepOutcome:
    params = ctx.params
    scenario = ctx.scenario
    system = scenario.system
    if params.adaptive_cmax and ctx.cost_bound is None:
        ctx.c_max = update_cmax(ctx.tree, ctx.best_cost, params)
    x_rand = sample_target(ctx.stream, system.state_bounds, scenario.goal, params.goal_bias)
    c_rand = sample_cost(ctx.stream, ctx.c_max)
    t_rand = sample_duration(ctx.stream, params.t_prop)
    u_rand = sample_control(ctx.stream, system.control_bounds)
    near = ctx.index.nearest(AugmentedState(x_rand, c_rand))
    return ctx.extend(near, u_rand, t_rand, "ao")


def rrt_baseline_step(ctx: PlannerContext) -> StepOutcome:
    """AO-RRT iteration without the cost draw; ``ctx.index`` must ignore cost."""

    params = ctx.params
    scenario = ctx.scenario
    system = scenario.system
    x_rand = sample_target(ctx.stream, system.state_bounds, scenario.goal, params.goal_bias)
    t_rand = sample_duration(ctx.stream, params.t_prop)
    u_rand = sample_control(ctx.stream, system.control_bounds)
    near = ctx.index.nearest(AugmentedState(x_rand, 0.0))
    return ctx.extend(near, u_rand, t_rand, "rrt")


def state_only_weights(weights: MetricWeights) -> MetricWeights:
    return MetricWeights(weights.w_x if weights.w_x > 0.0 else 1.0, 0.0)


class RunClock:
    """Wallclock read at most once every ``stride`` iterations."""

    def __init__(self, stride: int) -> None:
        self.stride = max(1, stride)
        self.start = time.perf_counter()
        self.elapsed = 0.0

    def now(self) -> float:
        return time.perf_counter() - self.start

    def tick(self, iteration: int) -> float:
        if iteration % self.stride == 0:
            self.elapsed = self.now()
        return self.elapsed


def snapshot(ctx: PlannerContext, result: PlanResult, iteration: int, elapsed: float) -> LogEntry:
    best = ctx.best_cost
    if result.best is not None and (best is None or result.best.cost < best):
        best = result.best.cost
    return LogEntry(iteration, elapsed, best, len(ctx.tree), ctx.tree.pruned)


def run_iterations(
    ctx: PlannerContext,
    step: StepFn,
    result: PlanResult,
    clock: RunClock,
    *,
    iterations: int | None = None,
    time_budget: float | None = None,
    tags: Callable[[int], str] | None = None,
    stop_on_improvement: bool = False,
) -> int:
    """Run ``step`` until the iteration cap or the time budget, logging into ``result``.

    Iterations are numbered from ``result.iterations`` so several trees can
    share one log.  Checkpoints are iteration counts in iteration mode and
    seconds otherwise.  Returns the number of iterations executed here.
    """

    params = ctx.params
    pending = list(params.checkpoints[len(result.checkpoints) :])
    timed = time_budget is not None or params.by_time
    start = result.iterations
    done = start
    while True:
        if not params.by_time:
            while pending and pending[0] <= done:
                result.checkpoints.append(snapshot(ctx, result, done, clock.now()))
                pending.pop(0)
        if iterations is not None and done - start >= iterations:
            break
        if timed:
            elapsed = clock.tick(done)
            if params.by_time:
                while pending and pending[0] <= elapsed:
                    result.checkpoints.append(snapshot(ctx, result, done, elapsed))
                    pending.pop(0)
            if time_budget is not None and elapsed >= time_budget:
                break
        outcome = step(done)
        if tags is not None:
            result.provenance.append(tags(done))
        done += 1
        if outcome.reason is not None:
            ctx.rejections[outcome.reason] += 1
        if outcome.improved:
            result.improvements.append(snapshot(ctx, result, done, clock.now()))
            if stop_on_improvement:
                break
    result.iterations = done
    return done - start


def close_checkpoints(ctx: PlannerContext, result: PlanResult, clock: RunClock) -> None:
    """Checkpoints past the end of the run repeat the final state."""

    elapsed = clock.now()
    while len(result.checkpoints) < len(ctx.params.checkpoints):
        result.checkpoints.append(snapshot(ctx, result, result.iterations, elapsed))


def finish(ctx: PlannerContext, result: PlanResult) -> PlanResult:
    result.tree = ctx.tree
    if ctx.best is not None:
        result.best = ctx.tree.trace_path(ctx.best)
    result.rejections = dict(sorted(ctx.rejections.items()))
    return result


def run_single_tree(
    ctx: PlannerContext,
    variant: str,
    step: StepFn,
    tags: Callable[[int], str],
) -> PlanResult:
    params = ctx.params
    result = PlanResult(variant=variant, best=None, tree=ctx.tree)
    clock = RunClock(get_settings().timer_stride)
    if ctx.best is not None:
        result.improvements.append(snapshot(ctx, result, 0, 0.0))
    run_iterations(
        ctx,
        step,
        result,
        clock,
        iterations=params.iterations,
        time_budget=params.time_budget,
        tags=tags,
    )
    close_checkpoints(ctx, result, clock)
    return finish(ctx, result)


def ao_rrt_plan(
    scenario: Scenario,
    params: PlannerParams,
    stream: RandomStream,
    *,
    variant: str = "ao_rrt",
) -> PlanResult:
    ctx = PlannerContext.create(scenario, params, stream)
    return run_single_tree(ctx, variant, lambda _: ao_rrt_step(ctx), lambda _: "ao")


def rrt_plan(scenario: Scenario, params: PlannerParams, stream: RandomStream) -> PlanResult:
    params = params.with_overrides(adaptive_cmax=False, pruning=False)
    ctx = PlannerContext.create(scenario, params, stream, weights=state_only_weights(params.weights))
    return run_single_tree(ctx, "rrt", lambda _: rrt_baseline_step(ctx), lambda _: "rrt")
