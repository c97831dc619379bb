"""Built-in desk-scale scenarios, addressable by name."""

from __future__ import annotations

from functools import lru_cache
from math import pi

from aoplan.core.errors import InvalidScenarioError
from aoplan.core.types import Box, GoalRegion
from aoplan.dynamics.systems import build_system
from aoplan.geometry.obstacles import Obstacle, ObstacleSet
from aoplan.scenarios.model import Scenario, ScenarioDefaults

# The car stands in for the full vehicle models, which cannot be rebuilt at desk scale.
SUBSTITUTION_NOTE = (
    "car_parking_lite uses a 3-state kinematic car as a qualitative stand-in for "
    "higher-dimensional vehicle models; it has no oracle"
)


# Both oracle systems are polynomial in time under a constant control, so RK4
# is exact at any step; collisions are still checked every 0.02 s.


def geo2d_one_box() -> Scenario:
    system = build_system("single_integrator_2d", {"speed_limit": 1.0}).with_bounds(
        state_bounds=Box([-2.0, -5.0], [12.0, 5.0])
    )
    return Scenario(
        name="geo2d_one_box",
        system=system,
        obstacles=ObstacleSet((Obstacle.box([4.0, -1.0], [6.0, 1.0]),), system.state_bounds),
        x_init=[0.0, 0.0],
        goal=GoalRegion([10.0, 0.0], 0.5),
        defaults=ScenarioDefaults(
            t_prop=2.0, c_max=30.0, w_x=1.0, w_c=0.2, resolution=0.02, integrator_step=0.1
        ),
        oracle="point_robot",
        description="point robot, one box between start and goal",
    )


def di1d_rest_to_rest() -> Scenario:
    system = build_system("double_integrator_1d", {"max_accel": 1.0})
    return Scenario(
        name="di1d_rest_to_rest",
        system=system,
        obstacles=ObstacleSet((), system.state_bounds),
        x_init=[0.0, 0.0],
        goal=GoalRegion([4.0, 0.0], 0.25),
        defaults=ScenarioDefaults(t_prop=1.0, c_max=10.0, resolution=0.02, integrator_step=0.05),
        oracle="double_integrator",
        description="1D double integrator, rest to rest over distance 4",
    )


def di2d_two_boxes() -> Scenario:
    system = build_system("double_integrator_2d", {})
    obstacles = (
        Obstacle.box([3.0, 0.0], [5.0, 6.5]),
        Obstacle.box([6.0, 3.5], [8.0, 10.0]),
    )
    return Scenario(
        name="di2d_two_boxes",
        system=system,
        obstacles=ObstacleSet(obstacles, system.state_bounds),
        x_init=[1.0, 1.0, 0.0, 0.0],
        goal=GoalRegion([9.0, 9.0], 0.5, projection=(0, 1)),
        defaults=ScenarioDefaults(t_prop=1.0, c_max=40.0),
        description="planar double integrator weaving between two walls",
    )


def car_parking_lite() -> Scenario:
    system = build_system("kinematic_car", {})
    obstacles = (
        Obstacle.box([3.0, 3.0], [6.0, 5.0]),
        Obstacle.box([6.8, 6.5], [7.2, 9.5]),
        Obstacle.box([8.8, 6.5], [9.2, 9.5]),
    )
    return Scenario(
        name="car_parking_lite",
        system=system,
        obstacles=ObstacleSet(obstacles, system.state_bounds),
        x_init=[1.0, 1.0, 0.0],
        goal=GoalRegion([8.0, 8.5, pi / 2.0], 0.6),
        defaults=ScenarioDefaults(t_prop=1.0, c_max=40.0),
        description="kinematic car parking nose-in between two walls",
    )


_BUILDERS = {
    "geo2d_one_box": geo2d_one_box,
    "di1d_rest_to_rest": di1d_rest_to_rest,
    "di2d_two_boxes": di2d_two_boxes,
    "car_parking_lite": car_parking_lite,
}


@lru_cache(maxsize=1)
def builtin_scenarios() -> dict[str, Scenario]:
    return {name: builder() for name, builder in _BUILDERS.items()}


def get_scenario(name: str) -> Scenario:
    try:
        return builtin_scenarios()[name]
    except KeyError as exc:
        raise InvalidScenarioError(
            f"unknown scenario {name!r}; expected one of {sorted(_BUILDERS)}"
        ) from exc
