"""Scenario JSON files (``"schema": 1``).

Files are validated in two passes: the pydantic models below check shapes
and types, then the domain constructors check dimensions, bounds and that
``x_init`` is free.  Either failure raises :class:`InvalidScenarioError`
naming the offending field.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from aoplan.core.errors import InvalidScenarioError, ScenarioParseError
from aoplan.core.types import Box, GoalRegion
from aoplan.dynamics.systems import build_system
from aoplan.geometry.obstacles import Obstacle, ObstacleSet
from aoplan.scenarios.model import Scenario, ScenarioDefaults

SCHEMA_VERSION = 1


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class SystemSpec(_Model):
    name: str
    params: dict[str, Any] = Field(default_factory=dict)


class BoundsSpec(_Model):
    state_min: list[float]
    state_max: list[float]
    control_min: list[float]
    control_max: list[float]


class ObstacleSpec(_Model):
    type: Literal["box", "ball"]
    projection: list[int] = Field(default_factory=lambda: [0, 1])
    min: list[float] | None = None
    max: list[float] | None = None
    center: list[float] | None = None
    radius: float | None = None


class GoalSpec(_Model):
    center: list[float]
    radius: float
    projection: list[int] | None = None


class DefaultsSpec(_Model):
    t_prop: float
    c_max: float
    w_x: float = 1.0
    w_c: float = 1.0
    resolution: float | None = None
    integrator_step: float | None = None
    goal_bias: float = 0.05


class ScenarioFile(_Model):
    schema_version: Literal[1] = Field(alias="schema")
    name: str
    description: str = ""
    system: SystemSpec
    bounds: BoundsSpec
    obstacles: list[ObstacleSpec] = Field(default_factory=list)
    x_init: list[float]
    goal: GoalSpec
    defaults: DefaultsSpec
    oracle: str | None = None


def _obstacle(spec: ObstacleSpec, index: int) -> Obstacle:
    try:
        if spec.type == "box":
            if spec.min is None or spec.max is None:
                raise InvalidScenarioError("box needs min and max")
            return Obstacle.box(spec.min, spec.max, spec.projection)
        if spec.center is None or spec.radius is None:
            raise InvalidScenarioError("ball needs center and radius")
        return Obstacle.ball(spec.center, spec.radius, spec.projection)
    except InvalidScenarioError as exc:
        raise InvalidScenarioError(f"obstacles[{index}]: {exc}") from exc


def _box(lo: list[float], hi: list[float], field: str) -> Box:
    try:
        return Box(lo, hi)
    except InvalidScenarioError as exc:
        raise InvalidScenarioError(f"bounds.{field}: {exc}") from exc


def to_scenario(document: ScenarioFile) -> Scenario:
    bounds = document.bounds
    system = build_system(document.system.name, document.system.params).with_bounds(
        state_bounds=_box(bounds.state_min, bounds.state_max, "state_min/state_max"),
        control_bounds=_box(bounds.control_min, bounds.control_max, "control_min/control_max"),
    )
    goal = document.goal
    return Scenario(
        name=document.name,
        system=system,
        obstacles=ObstacleSet(
            tuple(_obstacle(spec, i) for i, spec in enumerate(document.obstacles)),
            system.state_bounds,
        ),
        x_init=document.x_init,
        goal=GoalRegion(goal.center, goal.radius, tuple(goal.projection or ())),
        defaults=ScenarioDefaults(**document.defaults.model_dump()),
        oracle=document.oracle,
        description=document.description,
    )


def _floats(values: Any) -> list[float]:
    return [float(v) for v in values]


def scenario_document(scenario: Scenario) -> ScenarioFile:
    system = scenario.system
    obstacles = []
    for obstacle in scenario.obstacles.obstacles:
        if obstacle.kind == "box":
            obstacles.append(
                ObstacleSpec(
                    type="box",
                    projection=list(obstacle.projection),
                    min=_floats(obstacle.lo),
                    max=_floats(obstacle.hi),
                )
            )
        else:
            obstacles.append(
                ObstacleSpec(
                    type="ball",
                    projection=list(obstacle.projection),
                    center=_floats(obstacle.center),
                    radius=obstacle.radius,
                )
            )
    defaults = scenario.defaults
    return ScenarioFile(
        schema_version=SCHEMA_VERSION,
        name=scenario.name,
        description=scenario.description,
        system=SystemSpec(name=system.name, params=dict(system.params)),
        bounds=BoundsSpec(
            state_min=_floats(system.state_bounds.lo),
            state_max=_floats(system.state_bounds.hi),
            control_min=_floats(system.control_bounds.lo),
            control_max=_floats(system.control_bounds.hi),
        ),
        obstacles=obstacles,
        x_init=_floats(scenario.x_init),
        goal=GoalSpec(
            center=_floats(scenario.goal.center),
            radius=scenario.goal.radius,
            projection=list(scenario.goal.projection),
        ),
        defaults=DefaultsSpec(
            t_prop=defaults.t_prop,
            c_max=defaults.c_max,
            w_x=defaults.w_x,
            w_c=defaults.w_c,
            resolution=defaults.resolution,
            integrator_step=defaults.integrator_step,
            goal_bias=defaults.goal_bias,
        ),
        oracle=scenario.oracle,
    )


def _field_path(location: tuple[Any, ...]) -> str:
    path = ""
    for part in location:
        path += f"[{part}]" if isinstance(part, int) else (f".{part}" if path else str(part))
    return path or "<root>"


def loads_scenario(data: bytes | str, source: str = "<string>") -> Scenario:
    try:
        raw = orjson.loads(data)
    except orjson.JSONDecodeError as exc:
        raise ScenarioParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        document = ScenarioFile.model_validate(raw)
    except ValidationError as exc:
        error = exc.errors()[0]
        raise InvalidScenarioError(f"{source}: {_field_path(error['loc'])}: {error['msg']}") from exc
    try:
        return to_scenario(document)
    except InvalidScenarioError as exc:
        raise InvalidScenarioError(f"{source}: {exc}") from exc


def parse_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ScenarioParseError(f"{path}: {exc.strerror or exc}") from exc
    return loads_scenario(data, str(path))


def dumps_scenario(scenario: Scenario) -> bytes:
    document = scenario_document(scenario).model_dump(by_alias=True)
    return orjson.dumps(document, option=orjson.OPT_INDENT_2) + b"\n"


def export_scenario(scenario: Scenario, path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(dumps_scenario(scenario))
    except OSError as exc:
        raise InvalidScenarioError(f"cannot write scenario to {path}: {exc.strerror or exc}") from exc
    return path
