from __future__ import annotations

import numpy as np
import pytest

from aoplan.core.errors import TrajectoryValidationError
from aoplan.core.types import AugmentedState, ControlSegment
from aoplan.dynamics.integrate import IntegratorConfig, propagate_augmented
from aoplan.dynamics.systems import AugmentedSystem, single_integrator_2d
from aoplan.metric.nn_index import MetricWeights, NnIndex
from aoplan.planners.ao_rrt import prune
from aoplan.planners.tree import PlanTree, replay_schedule

SYSTEM = AugmentedSystem(single_integrator_2d())
CFG = IntegratorConfig(step=0.05, max_duration=2.0)


def _grow(tree: PlanTree, parent: int, u: list[float], duration: float) -> int:
    y, traj = propagate_augmented(tree[parent].y, np.array(u), duration, SYSTEM, CFG)
    return tree.add(parent, y, traj.segments[0], traj, "ao")


def _indexed(tree: PlanTree) -> NnIndex:
    index = NnIndex(MetricWeights())
    for node in tree.live_nodes():
        index.insert(node.id, node.y)
    return index


def test_bookkeeping_and_replay() -> None:
    tree = PlanTree(np.zeros(2))
    a = _grow(tree, 0, [1.0, 0.0], 1.5)
    b = _grow(tree, a, [0.0, 1.0], 2.0)
    solution = tree.trace_path(b)

    tree.verify(SYSTEM, CFG)
    assert solution.cost == tree[a].y.c + tree[b].trajectory.cost
    y_end, replayed = replay_schedule(np.zeros(2), solution.schedule, SYSTEM, CFG)
    assert y_end.c == solution.cost
    np.testing.assert_array_equal(replayed.states, solution.trajectory.states)


def test_verify_detects_tampered_cost() -> None:
    tree = PlanTree(np.zeros(2))
    a = _grow(tree, 0, [1.0, 0.0], 1.0)
    tree[a].y = AugmentedState(tree[a].y.x, tree[a].y.c + 1e-9)

    with pytest.raises(TrajectoryValidationError):
        tree.verify(SYSTEM, CFG)


def test_prune_chain() -> None:
    tree = PlanTree(np.zeros(1))
    segment = ControlSegment([0.0], 1.0)
    a = tree.add(0, AugmentedState([1.0], 5.0), segment, None, "ao")
    tree.add(a, AugmentedState([2.0], 9.0), segment, None, "ao")
    index = _indexed(tree)

    assert prune(tree, index, 4.0) == 2
    assert [node.id for node in tree.live_nodes()] == [0]
    assert index.live_ids() == [0]
    assert tree.pruned == 2


def test_prune_keeps_everything_at_or_below_best() -> None:
    tree = PlanTree(np.zeros(2))
    a = _grow(tree, 0, [1.0, 0.0], 1.0)
    _grow(tree, a, [1.0, 0.0], 1.0)
    index = _indexed(tree)

    assert prune(tree, index, tree.max_live_cost()) == 0


def _check_random_prune(trees: int, nodes: int, seed: int) -> None:
    generator = np.random.default_rng(seed)
    for _ in range(trees):
        tree = PlanTree(np.zeros(2))
        for _ in range(nodes - 1):
            parent = int(generator.integers(len(tree.nodes)))
            _grow(tree, parent, list(generator.uniform(-1, 1, 2)), float(generator.uniform(0, 2)))
        threshold = float(generator.uniform(1.0, 6.0))
        expected = sorted(node.id for node in tree.live_nodes() if node.y.c <= threshold)
        index = _indexed(tree)

        prune(tree, index, threshold)

        survivors = [node.id for node in tree.live_nodes()]
        assert survivors == expected
        assert index.live_ids() == expected
        assert all(tree[node].parent is None or tree[tree[node].parent].live for node in survivors)
        tree.verify(SYSTEM, CFG)


def test_random_prune_matches_filter() -> None:
    _check_random_prune(trees=5, nodes=150, seed=4)


@pytest.mark.slow
def test_random_prune_matches_filter_at_scale() -> None:
    _check_random_prune(trees=100, nodes=1_000, seed=17)


def test_max_live_cost_tracks_removals() -> None:
    tree = PlanTree(np.zeros(1))
    segment = ControlSegment([0.0], 1.0)
    a = tree.add(0, AugmentedState([1.0], 3.2), segment, None, "ao")
    b = tree.add(0, AugmentedState([1.0], 7.1), segment, None, "ao")

    assert tree.max_live_cost() == 7.1
    tree.remove(b)
    assert tree.max_live_cost() == 3.2
    tree.remove(0)
    assert tree.root.live and tree[a].live
