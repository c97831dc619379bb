from __future__ import annotations

import pytest

from aoplan.core.errors import ParameterError
from aoplan.core.random_stream import RandomStream
from aoplan.planners.ao_rrt import ao_rrt_plan
from aoplan.planners.hybrid import DensityGridStrategy, NoOpStrategy, build_strategy, hybrid_plan
from aoplan.planners.run import verify_result
from aoplan.scenarios.model import Scenario


def _node_table(result) -> list[tuple]:
    return [(node.parent, node.y.x.tolist(), node.y.c) for node in result.tree.nodes]


def test_noop_strategy_reduces_to_ao_rrt(geo2d: Scenario) -> None:
    hybrid = hybrid_plan(geo2d, geo2d.planner_params(iterations=400), RandomStream(11), pln="noop")
    plain = ao_rrt_plan(geo2d, geo2d.planner_params(iterations=200), RandomStream(11))

    assert _node_table(hybrid) == _node_table(plain)
    assert hybrid.best_cost == plain.best_cost


def test_provenance_alternates(geo2d: Scenario) -> None:
    result = hybrid_plan(geo2d, geo2d.planner_params(iterations=9), RandomStream(1), pln=NoOpStrategy())

    assert result.provenance == ["ao", "pln", "ao", "pln", "ao", "pln", "ao", "pln", "ao"]
    assert result.variant == "hybrid"


def test_density_strategy_grows_tagged_nodes(open_field: Scenario) -> None:
    params = open_field.planner_params(iterations=600)

    result = hybrid_plan(open_field, params, RandomStream(3))

    tags = {node.tag for node in result.tree.nodes[1:]}
    assert "pln" in tags
    assert tags <= {"ao", "pln"}
    verify_result(open_field, params, result)


def test_density_cells_include_the_cost_axis(open_field: Scenario) -> None:
    strategy = DensityGridStrategy(open_field, open_field.planner_params(iterations=1, grid_cells=4))

    low = strategy.cell_of(open_field.x_init, 0.0)
    high = strategy.cell_of(open_field.x_init, 1e9)

    assert low[:2] == high[:2]
    assert low[2] == 0
    assert high[2] == 3


def test_unknown_strategy_is_rejected(open_field: Scenario) -> None:
    with pytest.raises(ParameterError, match="exploration strategy"):
        build_strategy("frontier", open_field, open_field.planner_params(iterations=1))
