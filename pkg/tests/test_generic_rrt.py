from __future__ import annotations

import numpy as np

from aoplan.core.random_stream import RandomStream
from aoplan.planners.ao_rrt import ao_rrt_plan
from aoplan.planners.generic_rrt import GenericRrt, rrt_over_augmented_system
from aoplan.scenarios.model import Scenario


def test_rrt_on_augmented_system_matches_ao_rrt(geo2d: Scenario) -> None:
    params = geo2d.planner_params(iterations=300, adaptive_cmax=False)
    d = geo2d.system.state_dim

    ao = ao_rrt_plan(geo2d, params, RandomStream(21))
    generic = rrt_over_augmented_system(geo2d, params, RandomStream(21))
    generic.run(300)

    assert len(generic) == len(ao.tree.nodes)
    for node, twin in zip(ao.tree.nodes, generic.nodes):
        assert twin.parent == node.parent
        assert np.array_equal(twin.state[:d], node.y.x)
        assert twin.state[d] == node.y.c
    assert generic.rejections == sum(ao.rejections.values())


def test_generic_engine_counts_rejections(open_field: Scenario) -> None:
    cfg = open_field.integrator(open_field.planner_params(iterations=1))
    draws = iter([(np.array([1.0, 0.0]), np.array([1.0, 0.0]), 0.5), (np.array([0.0, 1.0]), np.array([0.0, 1.0]), 0.5)])

    engine = GenericRrt(
        open_field.system,
        open_field.x_init,
        lambda: next(draws),
        lambda trajectory: trajectory.final_state[1] <= 0.0,
        cfg,
    )

    assert engine.step() == 1
    assert engine.step() is None
    assert engine.rejections == 1
    assert engine.nodes[1].parent == 0
    assert engine.nodes[1].state[0] > 0.0
