"""Hybrid planner: AO-RRT iterations alternating with an exploration strategy.

Even iterations run :func:`ao_rrt_step`; odd iterations hand the tree to a
strategy.  Whoever adds a node, it goes through the same propagation and
cost bookkeeping, so the tree invariants do not depend on the strategy.
"""

from __future__ import annotations

import logging
from typing import Protocol

import numpy as np

from aoplan.core.errors import ParameterError
from aoplan.core.random_stream import RandomStream
from aoplan.planners.ao_rrt import PlannerContext, ao_rrt_step, run_single_tree
from aoplan.planners.params import PlannerParams, PlanResult, StepOutcome
from aoplan.scenarios.model import Scenario

logger = logging.getLogger(__name__)

CellKey = tuple[int, ...]


class ExplorationStrategy(Protocol):
    name: str

    def observe(self, ctx: PlannerContext, node_id: int) -> None: ...

    def step(self, ctx: PlannerContext) -> StepOutcome: ...


class NoOpStrategy:
    """Odd iterations do nothing."""

    name = "noop"

    def observe(self, ctx: PlannerContext, node_id: int) -> None:
        return None

    def step(self, ctx: PlannerContext) -> StepOutcome:
        return StepOutcome()


class DensityGridStrategy:
    """Extend from the least crowded region of a coarse grid.

    The grid covers up to two goal-projection coordinates plus the cost axis
    (scaled by ``params.c_max`` and clamped into the top cell).  Each step
    picks the non-empty cell with the fewest live nodes, a random node in it
    and a random control and duration from the ``pln`` substream.
    """

    name = "density"

    def __init__(self, scenario: Scenario, params: PlannerParams) -> None:
        bounds = scenario.system.state_bounds
        self.axes = list(scenario.goal.projection[:2])
        self.lo = bounds.lo[self.axes]
        self.span = np.where(bounds.extent[self.axes] > 0.0, bounds.extent[self.axes], 1.0)
        self.cost_span = params.c_max
        self.cells_per_axis = params.grid_cells
        self.cells: dict[CellKey, list[int]] = {}

    def cell_of(self, x: np.ndarray, c: float) -> CellKey:
        scaled = np.append((x[self.axes] - self.lo) / self.span, c / self.cost_span)
        index = np.clip(np.floor(scaled * self.cells_per_axis), 0, self.cells_per_axis - 1)
        return tuple(int(i) for i in index)

    def observe(self, ctx: PlannerContext, node_id: int) -> None:
        node = ctx.tree[node_id]
        self.cells.setdefault(self.cell_of(node.y.x, node.y.c), []).append(node_id)

    def _sparsest_cell(self, ctx: PlannerContext) -> list[int] | None:
        while self.cells:
            key = min(self.cells, key=lambda k: (len(self.cells[k]), k))
            members = self.cells[key]
            live = [node_id for node_id in members if ctx.tree[node_id].live]
            if len(live) == len(members):
                return members
            if live:
                self.cells[key] = live
            else:
                del self.cells[key]
        return None

    def step(self, ctx: PlannerContext) -> StepOutcome:
        members = self._sparsest_cell(ctx)
        if members is None:
            return StepOutcome(reason="pln-empty")
        generator = ctx.stream.substream("pln")
        near = members[int(generator.integers(len(members)))]
        bounds = ctx.scenario.system.control_bounds
        u = generator.uniform(bounds.lo, bounds.hi)
        duration = float(generator.uniform(0.0, ctx.params.t_prop))
        return ctx.extend(near, u, duration, "pln")


def build_strategy(name: str, scenario: Scenario, params: PlannerParams) -> ExplorationStrategy:
    if name == "density":
        return DensityGridStrategy(scenario, params)
    if name == "noop":
        return NoOpStrategy()
    raise ParameterError(f"unknown exploration strategy {name!r}; expected 'density' or 'noop'")


def hybrid_plan(
    scenario: Scenario,
    params: PlannerParams,
    stream: RandomStream,
    pln: str | ExplorationStrategy | None = None,
) -> PlanResult:
    if pln is None or isinstance(pln, str):
        strategy = build_strategy(pln or params.pln, scenario, params)
    else:
        strategy = pln
    ctx = PlannerContext.create(scenario, params, stream)
    strategy.observe(ctx, 0)
    ctx.on_add = lambda node_id: strategy.observe(ctx, node_id)

    def step(iteration: int) -> StepOutcome:
        return ao_rrt_step(ctx) if iteration % 2 == 0 else strategy.step(ctx)

    result = run_single_tree(ctx, "hybrid", step, lambda iteration: "ao" if iteration % 2 == 0 else "pln")
    logger.debug("hybrid run with %s strategy: %d live nodes", strategy.name, len(ctx.tree))
    return result
