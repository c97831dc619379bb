from __future__ import annotations

import os
from collections.abc import Iterator

import pytest

from aoplan.config import get_settings
from aoplan.core.random_stream import RandomStream
from aoplan.core.types import GoalRegion
from aoplan.dynamics.systems import build_system
from aoplan.geometry.obstacles import ObstacleSet
from aoplan.scenarios.builtin import builtin_scenarios
from aoplan.scenarios.model import Scenario, ScenarioDefaults


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    """Monte-Carlo acceptance runs take minutes; they only run on request."""

    if os.environ.get("AOPLAN_RUN_SLOW") == "1":
        return
    skip = pytest.mark.skip(reason="set AOPLAN_RUN_SLOW=1 to run slow acceptance tests")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def fresh_settings() -> Iterator[None]:
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def geo2d() -> Scenario:
    return builtin_scenarios()["geo2d_one_box"]


@pytest.fixture
def di1d() -> Scenario:
    return builtin_scenarios()["di1d_rest_to_rest"]


@pytest.fixture
def stream() -> RandomStream:
    return RandomStream(42)


def make_open_field(goal_center: tuple[float, float] = (3.0, 0.0), radius: float = 1.0) -> Scenario:
    """Obstacle-free point robot with a large goal close to the start."""

    system = build_system("single_integrator_2d", {"extent": 5.0})
    return Scenario(
        name="open_field",
        system=system,
        obstacles=ObstacleSet((), system.state_bounds),
        x_init=[0.0, 0.0],
        goal=GoalRegion(list(goal_center), radius),
        defaults=ScenarioDefaults(t_prop=1.0, c_max=20.0),
    )


@pytest.fixture
def open_field() -> Scenario:
    return make_open_field()


@pytest.fixture
def open_field_factory():
    return make_open_field
