"""Stable Sparse RRT baseline.

Both radii are Euclidean distances in state units, the units a single
propagation moves in, so ``delta_s`` has to stay well below the reach of one
``t_prop`` step or every child falls into its parent's witness.  Selection
takes the cheapest active node within ``delta_bn`` of the sample (the nearest
active node if none is that close).  A static witness set with radius
``delta_s`` keeps one representative per witness: a new node is accepted only
if its witness has no representative or it beats the representative's cost.
The displaced representative is deactivated, and inactive leaves are removed
from the tree, walking up while the parent also becomes an inactive leaf.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from aoplan.core.errors import PropagationDivergedError
from aoplan.core.random_stream import RandomStream
from aoplan.core.types import AugmentedState, in_goal
from aoplan.dynamics.integrate import propagate_augmented
from aoplan.geometry.obstacles import collision_free
from aoplan.metric.nn_index import MetricWeights, NnIndex
from aoplan.planners.ao_rrt import PlannerContext, run_single_tree
from aoplan.planners.params import PlannerParams, PlanResult, StepOutcome
from aoplan.planners.sampling import sample_control, sample_duration, sample_target
from aoplan.scenarios.model import Scenario

logger = logging.getLogger(__name__)

_STATE_ONLY = MetricWeights(1.0, 0.0)


@dataclass(slots=True)
class SstState:
    delta_bn: float
    delta_s: float
    active: NnIndex = field(default_factory=lambda: NnIndex(_STATE_ONLY))
    witnesses: NnIndex = field(default_factory=lambda: NnIndex(_STATE_ONLY))
    representative: list[int | None] = field(default_factory=list)

    def key(self, x: np.ndarray) -> AugmentedState:
        return AugmentedState(x, 0.0)

    def witness_for(self, x: np.ndarray) -> int:
        """Nearest witness within ``delta_s``, creating a new one if needed."""

        point = self.key(x)
        if len(self.witnesses) and self.witnesses.within(point, self.delta_s):
            return self.witnesses.nearest(point)
        witness = len(self.representative)
        self.witnesses.insert(witness, point)
        self.representative.append(None)
        return witness


def _best_near(ctx: PlannerContext, sst: SstState, x_rand: np.ndarray) -> int:
    point = sst.key(x_rand)
    near = sst.active.within(point, sst.delta_bn)
    if not near:
        return sst.active.nearest(point)
    return min(near, key=lambda node_id: (ctx.tree[node_id].y.c, node_id))


def _drop_inactive_leaves(ctx: PlannerContext, node_id: int) -> None:
    tree = ctx.tree
    current: int | None = node_id
    while current is not None and current != 0:
        node = tree[current]
        if node.active or node.children or not node.live or current == ctx.best:
            return
        parent = node.parent
        tree.remove(current)
        current = parent


def sst_step(ctx: PlannerContext, sst: SstState) -> StepOutcome:
    params = ctx.params
    scenario = ctx.scenario
    system = scenario.system
    x_rand = sample_target(ctx.stream, system.state_bounds, scenario.goal, params.goal_bias)
    t_rand = sample_duration(ctx.stream, params.t_prop)
    u_rand = sample_control(ctx.stream, system.control_bounds)
    near = _best_near(ctx, sst, x_rand)
    try:
        y_new, trajectory = propagate_augmented(ctx.tree[near].y, u_rand, t_rand, ctx.system, ctx.integrator)
    except PropagationDivergedError:
        return StepOutcome(reason="diverged")
    if not collision_free(trajectory, scenario.obstacles, ctx.resolution):
        return StepOutcome(reason="collision")
    witness = sst.witness_for(y_new.x)
    previous = sst.representative[witness]
    if previous is not None and ctx.tree[previous].y.c <= y_new.c:
        return StepOutcome(reason="dominated")

    node_id = ctx.tree.add(near, y_new, trajectory.segments[0], trajectory, "sst")
    sst.active.insert(node_id, sst.key(y_new.x))
    sst.representative[witness] = node_id
    best_cost = ctx.best_cost
    improved = in_goal(y_new.x, scenario.goal) and (best_cost is None or y_new.c < best_cost)
    if improved:
        ctx.best = node_id
        logger.debug("sst best cost %.6g at node %d", y_new.c, node_id)
    if previous is not None:
        ctx.tree[previous].active = False
        sst.active.remove(previous)
        _drop_inactive_leaves(ctx, previous)
    return StepOutcome(added=node_id, improved=improved)


def sst_plan(
    scenario: Scenario,
    params: PlannerParams,
    stream: RandomStream,
    delta_bn: float | None = None,
    delta_s: float | None = None,
) -> PlanResult:
    params = params.with_overrides(delta_bn=delta_bn, delta_s=delta_s, pruning=False)
    ctx = PlannerContext.create(scenario, params, stream, weights=_STATE_ONLY)
    sst = SstState(params.delta_bn, params.delta_s)
    root = ctx.tree.root
    sst.active.insert(0, sst.key(root.y.x))
    sst.representative[sst.witness_for(root.y.x)] = 0
    return run_single_tree(ctx, "sst", lambda _: sst_step(ctx, sst), lambda _: "sst")
