"""System definitions ``x' = f(x, u)`` with running cost ``g(x, u)``.

Built-in systems are selected by name from scenario files.  Dynamics are
module-level functions bound with ``functools.partial`` so definitions stay
immutable and picklable for trial worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import partial
from math import cos, hypot, sin, sqrt, tan
from typing import Any, Callable, Mapping

import numpy as np

from aoplan.core.errors import InvalidScenarioError
from aoplan.core.types import Box

DerivativeFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
CostFn = Callable[[np.ndarray, np.ndarray], float]


@dataclass(frozen=True, slots=True)
class LipschitzConstants:
    """Declared constants ``K_x^f, K_u^f, K_x^g, K_u^g``."""

    kx_f: float
    ku_f: float
    kx_g: float = 0.0
    ku_g: float = 0.0

    @property
    def kx(self) -> float:
        """State constant of the augmented system."""

        return hypot(self.kx_f, self.kx_g)

    @property
    def ku(self) -> float:
        """Control constant of the augmented system."""

        return hypot(self.ku_f, self.ku_g)


@dataclass(frozen=True, slots=True)
class SystemDefinition:
    name: str
    state_dim: int
    control_dim: int
    f: DerivativeFn
    g: CostFn
    state_bounds: Box
    control_bounds: Box
    workspace: tuple[int, ...] = ()
    declared_lipschitz: LipschitzConstants | None = None
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.state_dim < 1 or self.control_dim < 1:
            raise InvalidScenarioError("system dimensions must be at least 1")
        if self.state_bounds.dim != self.state_dim:
            raise InvalidScenarioError(
                f"bounds.state_min/state_max have dimension {self.state_bounds.dim}, "
                f"system {self.name!r} expects {self.state_dim}"
            )
        if self.control_bounds.dim != self.control_dim:
            raise InvalidScenarioError(
                f"bounds.control_min/control_max have dimension {self.control_bounds.dim}, "
                f"system {self.name!r} expects {self.control_dim}"
            )
        workspace = tuple(int(i) for i in self.workspace) or tuple(range(self.state_dim))
        if any(i < 0 or i >= self.state_dim for i in workspace):
            raise InvalidScenarioError(f"workspace indices {workspace} out of range")
        object.__setattr__(self, "workspace", workspace)

    def with_bounds(self, state_bounds: Box | None = None, control_bounds: Box | None = None) -> "SystemDefinition":
        return replace(
            self,
            state_bounds=state_bounds or self.state_bounds,
            control_bounds=control_bounds or self.control_bounds,
        )

    def spot_check(self, generator: np.random.Generator, samples: int = 64) -> None:
        """Sample in-bounds pairs; ``f`` must be finite and ``g`` non-negative."""

        for _ in range(samples):
            x = generator.uniform(self.state_bounds.lo, self.state_bounds.hi)
            u = generator.uniform(self.control_bounds.lo, self.control_bounds.hi)
            dx = np.asarray(self.f(x, u), dtype=np.float64)
            cost_rate = float(self.g(x, u))
            if dx.shape != (self.state_dim,) or not np.all(np.isfinite(dx)):
                raise InvalidScenarioError(f"system {self.name!r}: f is not finite at x={x}, u={u}")
            if not np.isfinite(cost_rate) or cost_rate < 0.0:
                raise InvalidScenarioError(f"system {self.name!r}: g must be non-negative, got {cost_rate}")


def time_cost(x: np.ndarray, u: np.ndarray) -> float:
    return 1.0


def effort_cost(x: np.ndarray, u: np.ndarray) -> float:
    return float(np.dot(u, u))


def zero_cost(x: np.ndarray, u: np.ndarray) -> float:
    return 0.0


COST_FUNCTIONS: dict[str, CostFn] = {
    "time": time_cost,
    "effort": effort_cost,
}


def _cost_function(name: str) -> CostFn:
    try:
        return COST_FUNCTIONS[name]
    except KeyError as exc:
        raise InvalidScenarioError(
            f"system.params.cost {name!r} is unknown; expected one of {sorted(COST_FUNCTIONS)}"
        ) from exc


def _cost_lipschitz(cost: str, control_bounds: Box) -> float:
    if cost == "effort":
        largest = np.maximum(np.abs(control_bounds.lo), np.abs(control_bounds.hi))
        return 2.0 * float(np.sqrt(np.dot(largest, largest)))
    return 0.0


def _single_integrator(x: np.ndarray, u: np.ndarray, speed_limit: float | None) -> np.ndarray:
    velocity = np.array(u, dtype=np.float64)
    if speed_limit is not None:
        speed = sqrt(float(np.dot(velocity, velocity)))
        if speed > speed_limit:
            velocity *= speed_limit / speed
    return velocity


def _double_integrator_1d(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.array([x[1], u[0]])


def _double_integrator_2d(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.array([x[2], x[3], u[0], u[1]])


def _kinematic_car(x: np.ndarray, u: np.ndarray, wheelbase: float) -> np.ndarray:
    speed, steering = u[0], u[1]
    heading = x[2]
    return np.array([speed * cos(heading), speed * sin(heading), speed * tan(steering) / wheelbase])


def _linear(x: np.ndarray, u: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ x + b @ u


def single_integrator_2d(
    *,
    extent: float = 10.0,
    max_control: float = 1.0,
    speed_limit: float | None = 1.0,
    cost: str = "time",
) -> SystemDefinition:
    """Point robot ``x' = u``; the speed is saturated at ``speed_limit``."""

    controls = Box([-max_control] * 2, [max_control] * 2)
    return SystemDefinition(
        name="single_integrator_2d",
        state_dim=2,
        control_dim=2,
        f=partial(_single_integrator, speed_limit=speed_limit),
        g=_cost_function(cost),
        state_bounds=Box([-extent] * 2, [extent] * 2),
        control_bounds=controls,
        workspace=(0, 1),
        declared_lipschitz=LipschitzConstants(0.0, 1.0, 0.0, _cost_lipschitz(cost, controls)),
        params={"extent": extent, "max_control": max_control, "speed_limit": speed_limit, "cost": cost},
    )


def double_integrator_1d(
    *,
    extent: float = 10.0,
    max_speed: float = 5.0,
    max_accel: float = 1.0,
    cost: str = "time",
) -> SystemDefinition:
    """Position and velocity ``(p, v)`` driven by acceleration ``u``."""

    controls = Box([-max_accel], [max_accel])
    return SystemDefinition(
        name="double_integrator_1d",
        state_dim=2,
        control_dim=1,
        f=_double_integrator_1d,
        g=_cost_function(cost),
        state_bounds=Box([-extent, -max_speed], [extent, max_speed]),
        control_bounds=controls,
        workspace=(0,),
        declared_lipschitz=LipschitzConstants(1.0, 1.0, 0.0, _cost_lipschitz(cost, controls)),
        params={"extent": extent, "max_speed": max_speed, "max_accel": max_accel, "cost": cost},
    )


def double_integrator_2d(
    *,
    extent: float = 10.0,
    max_speed: float = 2.0,
    max_accel: float = 1.0,
    cost: str = "time",
) -> SystemDefinition:
    """Planar ``(x, y, vx, vy)`` with independent accelerations."""

    controls = Box([-max_accel] * 2, [max_accel] * 2)
    return SystemDefinition(
        name="double_integrator_2d",
        state_dim=4,
        control_dim=2,
        f=_double_integrator_2d,
        g=_cost_function(cost),
        state_bounds=Box([0.0, 0.0, -max_speed, -max_speed], [extent, extent, max_speed, max_speed]),
        control_bounds=controls,
        workspace=(0, 1),
        declared_lipschitz=LipschitzConstants(1.0, 1.0, 0.0, _cost_lipschitz(cost, controls)),
        params={"extent": extent, "max_speed": max_speed, "max_accel": max_accel, "cost": cost},
    )


def kinematic_car(
    *,
    extent: float = 10.0,
    wheelbase: float = 1.0,
    max_speed: float = 1.0,
    max_steering: float = 0.5,
    cost: str = "time",
) -> SystemDefinition:
    """Car ``(x, y, theta)`` with controls ``(speed, steering angle)``.

    The heading is a plain real coordinate bounded to two turns either way;
    leaving the box counts as a collision like any other state bound.
    """

    controls = Box([-max_speed, -max_steering], [max_speed, max_steering])
    steer = tan(max_steering) / wheelbase
    secant_sq = 1.0 / cos(max_steering) ** 2
    ku_f = sqrt(1.0 + steer**2 + (max_speed * secant_sq / wheelbase) ** 2)
    return SystemDefinition(
        name="kinematic_car",
        state_dim=3,
        control_dim=2,
        f=partial(_kinematic_car, wheelbase=wheelbase),
        g=_cost_function(cost),
        state_bounds=Box([0.0, 0.0, -4.0 * np.pi], [extent, extent, 4.0 * np.pi]),
        control_bounds=controls,
        workspace=(0, 1),
        declared_lipschitz=LipschitzConstants(max_speed, ku_f, 0.0, _cost_lipschitz(cost, controls)),
        params={
            "extent": extent,
            "wheelbase": wheelbase,
            "max_speed": max_speed,
            "max_steering": max_steering,
            "cost": cost,
        },
    )


def linear_system(
    a: Any,
    b: Any,
    *,
    state_bounds: Box,
    control_bounds: Box,
    g: CostFn = zero_cost,
    name: str = "linear",
) -> SystemDefinition:
    """``x' = A x + B u``; declared constants are the spectral norms."""

    a_matrix = np.array(a, dtype=np.float64, ndmin=2)
    b_matrix = np.array(b, dtype=np.float64, ndmin=2)
    if a_matrix.shape[0] != a_matrix.shape[1] or b_matrix.shape[0] != a_matrix.shape[0]:
        raise InvalidScenarioError("linear system matrices have inconsistent shapes")
    a_matrix.setflags(write=False)
    b_matrix.setflags(write=False)
    return SystemDefinition(
        name=name,
        state_dim=a_matrix.shape[0],
        control_dim=b_matrix.shape[1],
        f=partial(_linear, a=a_matrix, b=b_matrix),
        g=g,
        state_bounds=state_bounds,
        control_bounds=control_bounds,
        declared_lipschitz=LipschitzConstants(
            float(np.linalg.norm(a_matrix, 2)),
            float(np.linalg.norm(b_matrix, 2)),
        ),
    )


SYSTEM_BUILDERS: dict[str, Callable[..., SystemDefinition]] = {
    "single_integrator_2d": single_integrator_2d,
    "double_integrator_1d": double_integrator_1d,
    "double_integrator_2d": double_integrator_2d,
    "kinematic_car": kinematic_car,
}


def build_system(name: str, params: Mapping[str, Any] | None = None) -> SystemDefinition:
    """Instantiate a built-in system by its scenario-file name."""

    try:
        builder = SYSTEM_BUILDERS[name]
    except KeyError as exc:
        raise InvalidScenarioError(
            f"system.name {name!r} is unknown; expected one of {sorted(SYSTEM_BUILDERS)}"
        ) from exc
    try:
        return builder(**dict(params or {}))
    except TypeError as exc:
        raise InvalidScenarioError(f"system.params for {name!r}: {exc}") from exc


def _augmented_derivative(y: np.ndarray, u: np.ndarray, base: SystemDefinition) -> np.ndarray:
    d = base.state_dim
    x = y[:d]
    out = np.empty(d + 1)
    out[:d] = base.f(x, u)
    out[d] = base.g(x, u)
    return out


@dataclass(frozen=True, slots=True)
class AugmentedSystem:
    """``F(y, u) = (f(x, u), g(x, u))`` over ``Y = X x R+``."""

    base: SystemDefinition

    @property
    def state_dim(self) -> int:
        return self.base.state_dim

    def derivative(self, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        return _augmented_derivative(y, u, self.base)

    def as_system(self, cost_bound: float) -> SystemDefinition:
        """``F`` packaged as an ordinary system over ``Y`` with zero running cost."""

        base = self.base
        declared = base.declared_lipschitz
        return SystemDefinition(
            name=f"augmented[{base.name}]",
            state_dim=base.state_dim + 1,
            control_dim=base.control_dim,
            f=partial(_augmented_derivative, base=base),
            g=zero_cost,
            state_bounds=Box(
                np.append(base.state_bounds.lo, 0.0),
                np.append(base.state_bounds.hi, cost_bound),
            ),
            control_bounds=base.control_bounds,
            workspace=base.workspace,
            declared_lipschitz=(
                LipschitzConstants(declared.kx, declared.ku) if declared is not None else None
            ),
        )
