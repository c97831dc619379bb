from __future__ import annotations

import numpy as np
import pytest

from aoplan.core.types import Box, ControlSegment, GoalRegion, Trajectory
from aoplan.geometry.obstacles import Obstacle, ObstacleSet, clearance, collision_free, is_free

BOUNDS = Box([-20.0, -20.0], [20.0, 20.0])
UNIT_BOX = Obstacle.box([0.0, 0.0], [1.0, 1.0])


def _segment(start: list[float], end: list[float], duration: float = 1.0) -> Trajectory:
    return Trajectory(
        times=np.array([0.0, duration]),
        states=np.array([start, end], dtype=np.float64),
        segments=(ControlSegment([0.0, 0.0], duration),),
    )


def test_free_space_is_open() -> None:
    obstacles = ObstacleSet((UNIT_BOX,), BOUNDS)

    assert is_free(np.array([5.0, 5.0]), ObstacleSet((), BOUNDS))
    assert not is_free(np.array([1.0, 1.0]), obstacles)
    assert not is_free(np.array([0.5, 0.5]), obstacles)
    assert not is_free(np.array([20.0, 0.0]), obstacles)
    assert not is_free(np.array([25.0, 0.0]), obstacles)


def test_ball_obstacle() -> None:
    obstacles = ObstacleSet((Obstacle.ball([0.0, 0.0], 2.0),), BOUNDS)

    assert not is_free(np.array([2.0, 0.0]), obstacles)
    assert is_free(np.array([2.0, 0.1]), obstacles)


def test_obstacle_projection_applies_to_positions_only() -> None:
    bounds = Box([-5.0, -5.0, -1.0], [5.0, 5.0, 1.0])
    obstacles = ObstacleSet((Obstacle.box([1.0, 1.0], [2.0, 2.0]),), bounds)

    assert not is_free(np.array([1.5, 1.5, 0.0]), obstacles)
    assert is_free(np.array([0.5, 1.5, 0.9]), obstacles)


def test_dense_checking_catches_what_samples_miss() -> None:
    obstacles = ObstacleSet((Obstacle.box([4.0, -1.0], [6.0, 1.0]),), BOUNDS)
    crossing = _segment([0.0, 0.0], [10.0, 0.0], duration=10.0)

    assert collision_free(_segment([0.0, 5.0], [10.0, 5.0]), obstacles, 0.01)
    assert collision_free(crossing, obstacles)
    assert not collision_free(crossing, obstacles, 0.5)


def test_midpoint_in_obstacle_center() -> None:
    obstacles = ObstacleSet((UNIT_BOX,), BOUNDS)
    traj = Trajectory(
        times=np.array([0.0, 1.0, 2.0]),
        states=np.array([[-3.0, 0.5], [0.5, 0.5], [3.0, 0.5]]),
        segments=(ControlSegment([0.0, 0.0], 2.0),),
    )

    assert not collision_free(traj, obstacles)


def test_skimming_matches_fine_recheck() -> None:
    obstacles = ObstacleSet((UNIT_BOX,), BOUNDS)
    skim = _segment([-3.0, 1.01], [4.0, 1.01], duration=7.0)

    assert collision_free(skim, obstacles, 0.01) == collision_free(skim, obstacles, 1e-5)


def test_clearance_goal_term_binds() -> None:
    obstacles = ObstacleSet((Obstacle.box([10.0, -1.0], [11.0, 1.0]),), BOUNDS)
    traj = _segment([3.0, 0.0], [5.0, 0.0])

    assert clearance(traj, obstacles, GoalRegion([5.0, 0.0], 1.0), 0.01) == pytest.approx(1.0)


def test_clearance_is_zero_outside_goal() -> None:
    obstacles = ObstacleSet((), BOUNDS)

    assert clearance(_segment([0.0, 0.0], [1.0, 0.0]), obstacles, GoalRegion([5.0, 0.0], 1.0)) == 0.0


def test_clearance_closest_approach_to_unit_box() -> None:
    obstacles = ObstacleSet((UNIT_BOX,), BOUNDS)
    traj = _segment([-3.0, 1.5], [4.0, 1.5], duration=7.0)

    value = clearance(traj, obstacles, GoalRegion([4.0, 1.5], 2.0), 0.001)

    assert value == pytest.approx(0.5, abs=1e-3)


def test_removing_an_obstacle_never_hurts() -> None:
    obstacles = ObstacleSet((UNIT_BOX, Obstacle.ball([3.0, 3.0], 1.0)), BOUNDS)
    goal = GoalRegion([4.0, 1.5], 2.0)
    traj = _segment([-3.0, 1.5], [4.0, 1.5], duration=7.0)

    for index in range(2):
        fewer = obstacles.without(index)
        assert clearance(traj, fewer, goal, 0.01) >= clearance(traj, obstacles, goal, 0.01)
        assert collision_free(traj, fewer, 0.01) or not collision_free(traj, obstacles, 0.01)


def test_clearance_sees_an_obstacle_between_samples() -> None:
    obstacles = ObstacleSet((Obstacle.box([0.9, -0.1], [1.1, 0.1]),), BOUNDS)
    traj = _segment([0.0, 0.0], [2.0, 0.0])

    assert not collision_free(traj, obstacles, 0.01)
    assert clearance(traj, obstacles, GoalRegion([2.0, 0.0], 1.0)) == 0.0


def _random_polylines(count: int, seed: int) -> list[Trajectory]:
    rng = np.random.default_rng(seed)
    polylines = []
    for _ in range(count):
        samples = int(rng.integers(2, 6))
        states = rng.uniform(-3.0, 4.0, size=(samples, 2))
        times = np.concatenate([[0.0], np.cumsum(rng.uniform(0.05, 1.0, size=samples - 1))])
        polylines.append(
            Trajectory(times=times, states=states, segments=(ControlSegment([0.0, 0.0], float(times[-1])),))
        )
    return polylines


def _check_clearance_implies_collision_free(count: int) -> None:
    obstacles = ObstacleSet((UNIT_BOX, Obstacle.ball([2.5, -1.0], 0.75)), BOUNDS)
    positive = 0
    for traj in _random_polylines(count, seed=11):
        goal = GoalRegion(traj.final_state, 3.0)
        for resolution in (None, 0.25):
            if clearance(traj, obstacles, goal, resolution) > 0.0:
                positive += 1
                assert collision_free(traj, obstacles, 1e-3)
    assert positive > 0


def _check_collision_free_is_time_symmetric(count: int) -> None:
    obstacles = ObstacleSet((UNIT_BOX, Obstacle.ball([2.5, -1.0], 0.75)), BOUNDS)
    outcomes = set()
    for traj in _random_polylines(count, seed=5):
        for resolution in (None, 0.1):
            forward = collision_free(traj, obstacles, resolution)
            assert collision_free(traj.reversed(), obstacles, resolution) == forward
            outcomes.add(forward)
    assert outcomes == {True, False}


def test_positive_clearance_implies_collision_free() -> None:
    _check_clearance_implies_collision_free(300)


def test_collision_free_is_symmetric_under_time_reversal() -> None:
    _check_collision_free_is_time_symmetric(300)


@pytest.mark.slow
def test_positive_clearance_implies_collision_free_at_scale() -> None:
    _check_clearance_implies_collision_free(10_000)


@pytest.mark.slow
def test_collision_free_is_symmetric_under_time_reversal_at_scale() -> None:
    _check_collision_free_is_time_symmetric(10_000)
