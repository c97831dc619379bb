"""Multi-tree AO meta-planner: restart with a shrinking cost bound.

Round ``i`` grows a fresh tree whose cost coordinate is capped at ``c_i``
(round 1 uses ``params.c_max``).  The round ends at its first solution
``s``; the next round uses ``c_{i+1} = shrink_factor * s`` and only accepts
goal nodes strictly cheaper than ``s``.  The run stops when a round fails,
after ``max_rounds`` rounds, or when the budget is spent.

Budget policy: each round gets ``iterations // max_rounds`` iterations (at
least one, capped by what is left) and an equal share of the remaining
time budget.
"""

from __future__ import annotations

import logging
from collections import Counter

from aoplan.config import get_settings
from aoplan.core.random_stream import RandomStream
from aoplan.planners.ao_rrt import (
    PlannerContext,
    RunClock,
    ao_rrt_step,
    close_checkpoints,
    run_iterations,
    snapshot,
)
from aoplan.planners.params import PlannerParams, PlanResult
from aoplan.planners.tree import PlanTree
from aoplan.scenarios.model import Scenario

logger = logging.getLogger(__name__)


def _round_iterations(params: PlannerParams, used: int) -> int | None:
    if params.iterations is None:
        return None
    left = params.iterations - used
    return min(left, max(1, params.iterations // params.max_rounds))


def _round_deadline(params: PlannerParams, clock: RunClock, rounds_left: int) -> float | None:
    if params.time_budget is None:
        return None
    now = clock.now()
    return now + max(0.0, params.time_budget - now) / rounds_left


def multi_tree_plan(scenario: Scenario, params: PlannerParams, stream: RandomStream) -> PlanResult:
    round_params = params.with_overrides(adaptive_cmax=False, pruning=False)
    result = PlanResult(variant="multi_tree_ao", best=None, tree=PlanTree(scenario.x_init), rounds=0)
    clock = RunClock(get_settings().timer_stride)
    rejections: Counter = Counter()
    bound = params.c_max
    ceiling: float | None = None
    ctx: PlannerContext | None = None

    for round_index in range(params.max_rounds):
        ctx = PlannerContext.create(
            scenario,
            round_params,
            stream,
            cost_bound=bound,
            goal_ceiling=ceiling,
            rejections=rejections,
        )
        result.rounds = round_index + 1
        if ctx.best is not None:
            result.best = ctx.tree.trace_path(ctx.best)
            result.tree = ctx.tree
            result.improvements.append(snapshot(ctx, result, result.iterations, 0.0))
            break
        iterations = _round_iterations(params, result.iterations)
        if iterations is not None and iterations <= 0:
            result.rounds = round_index
            break
        run_iterations(
            ctx,
            lambda _: ao_rrt_step(ctx),
            result,
            clock,
            iterations=iterations,
            time_budget=_round_deadline(params, clock, params.max_rounds - round_index),
            tags=lambda _: "ao",
            stop_on_improvement=True,
        )
        if ctx.best is None:
            if result.best is None:
                result.tree = ctx.tree
            logger.debug("round %d found no solution below %.6g; stopping", round_index + 1, bound)
            break
        cost = ctx.tree[ctx.best].y.c
        result.best = ctx.tree.trace_path(ctx.best)
        result.tree = ctx.tree
        logger.debug("round %d solution %.6g after %d iterations", round_index + 1, cost, result.iterations)
        bound = params.shrink_factor * cost
        ceiling = cost

    if ctx is not None:
        close_checkpoints(ctx, result, clock)
    result.rejections = dict(sorted(rejections.items()))
    return result
