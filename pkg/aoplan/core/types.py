"""Value types shared by the dynamics, geometry, metric and planner modules.

States and controls are plain float64 numpy vectors.  The dataclasses below
freeze their arrays so instances can be shared freely between planners.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import isfinite
from typing import Iterable, Sequence

import numpy as np

from aoplan.core.errors import InvalidScenarioError, TrajectoryValidationError

State = np.ndarray
Control = np.ndarray

# Slack used when comparing summed segment durations with sample times.
TIME_TOLERANCE = 1e-9


def _frozen(values: Iterable[float] | np.ndarray, *, ndim: int = 1) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    if array.ndim != ndim:
        raise InvalidScenarioError(f"expected a {ndim}-d array, got shape {array.shape}")
    array.setflags(write=False)
    return array


def as_state(values: Iterable[float] | np.ndarray, dim: int | None = None) -> State:
    """Validate and freeze a state vector."""

    state = _frozen(values)
    if state.size < 1:
        raise InvalidScenarioError("state must have at least one coordinate")
    if dim is not None and state.size != dim:
        raise InvalidScenarioError(f"state has dimension {state.size}, expected {dim}")
    if not np.all(np.isfinite(state)):
        raise InvalidScenarioError("state coordinates must be finite")
    return state


@dataclass(frozen=True, slots=True)
class Box:
    """Axis-aligned box ``lo <= v <= hi``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        lo = _frozen(self.lo)
        hi = _frozen(self.hi)
        if lo.shape != hi.shape or lo.size == 0:
            raise InvalidScenarioError("box bounds must be non-empty and equally sized")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InvalidScenarioError("box bounds must be finite")
        if np.any(lo > hi):
            raise InvalidScenarioError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return int(self.lo.size)

    @property
    def extent(self) -> np.ndarray:
        return self.hi - self.lo

    def contains(self, v: np.ndarray) -> bool:
        return bool(np.all(v >= self.lo) and np.all(v <= self.hi))


@dataclass(frozen=True, slots=True)
class AugmentedState:
    """A point ``y = (x, c)`` of the state-cost space."""

    x: State
    c: float

    def __post_init__(self) -> None:
        if not isinstance(self.x, np.ndarray) or self.x.flags.writeable:
            object.__setattr__(self, "x", as_state(self.x))
        c = float(self.c)
        if not isfinite(c) or c < 0.0:
            raise InvalidScenarioError(f"cost-to-come must be finite and non-negative, got {c}")
        object.__setattr__(self, "c", c)

    @property
    def vector(self) -> np.ndarray:
        """The ``(d+1)``-vector ``(x, c)``."""

        return np.append(self.x, self.c)


@dataclass(frozen=True, slots=True)
class ControlSegment:
    """Constant control ``u`` held for ``duration`` seconds."""

    u: Control
    duration: float

    def __post_init__(self) -> None:
        u = self.u if isinstance(self.u, np.ndarray) and not self.u.flags.writeable else _frozen(self.u)
        duration = float(self.duration)
        if not isfinite(duration) or duration < 0.0:
            raise InvalidScenarioError(f"segment duration must be non-negative, got {duration}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "duration", duration)


@dataclass(frozen=True, slots=True)
class Trajectory:
    """Integrated path: sample times, sample states, control segments and cost."""

    times: np.ndarray
    states: np.ndarray
    segments: tuple[ControlSegment, ...]
    cost: float = 0.0

    def __post_init__(self) -> None:
        times = self.times if not self.times.flags.writeable else _frozen(self.times)
        states = self.states if not self.states.flags.writeable else _frozen(self.states, ndim=2)
        if times.shape[0] != states.shape[0]:
            raise TrajectoryValidationError("sample times and states differ in length")
        if times.size:
            if times[0] != 0.0:
                raise TrajectoryValidationError("sample times must start at 0")
            if times.size > 1 and not np.all(np.diff(times) > 0.0):
                raise TrajectoryValidationError("sample times must be strictly increasing")
        cost = float(self.cost)
        if not isfinite(cost) or cost < 0.0:
            raise TrajectoryValidationError(f"trajectory cost must be non-negative, got {cost}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "cost", cost)

    @property
    def duration(self) -> float:
        return float(self.times[-1]) if self.times.size else 0.0

    @property
    def final_state(self) -> State:
        return self.states[-1]

    def __len__(self) -> int:
        return int(self.times.size)

    def check_segments(self, tolerance: float = TIME_TOLERANCE) -> None:
        total = sum(segment.duration for segment in self.segments)
        if abs(total - self.duration) > tolerance * max(1.0, total):
            raise TrajectoryValidationError(
                f"segment durations sum to {total}, final sample time is {self.duration}"
            )

    def reversed(self) -> "Trajectory":
        """Time-reversed copy covering the same sample set."""

        end = self.duration
        return Trajectory(
            times=(end - self.times[::-1]).copy(),
            states=self.states[::-1].copy(),
            segments=tuple(reversed(self.segments)),
            cost=self.cost,
        )


def concatenate_trajectories(parts: Sequence[Trajectory]) -> Trajectory:
    """Join consecutive trajectories, dropping duplicated junction samples."""

    parts = [part for part in parts if len(part)]
    if not parts:
        return Trajectory(np.zeros(0), np.zeros((0, 1)), (), 0.0)
    times: list[np.ndarray] = [parts[0].times]
    states: list[np.ndarray] = [parts[0].states]
    segments: list[ControlSegment] = list(parts[0].segments)
    cost = parts[0].cost
    offset = parts[0].duration
    for part in parts[1:]:
        times.append(part.times[1:] + offset)
        states.append(part.states[1:])
        segments.extend(part.segments)
        cost = cost + part.cost
        offset = offset + part.duration
    return Trajectory(
        times=np.concatenate(times),
        states=np.concatenate(states, axis=0),
        segments=tuple(segments),
        cost=cost,
    )


@dataclass(frozen=True, slots=True)
class GoalRegion:
    """Ball of ``radius`` around ``center`` in the ``projection`` coordinates."""

    center: np.ndarray
    radius: float
    projection: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        center = as_state(self.center)
        radius = float(self.radius)
        if not isfinite(radius) or radius <= 0.0:
            raise InvalidScenarioError("goal.radius must be positive")
        projection = tuple(int(i) for i in self.projection) or tuple(range(center.size))
        if len(set(projection)) != len(projection) or min(projection) < 0:
            raise InvalidScenarioError("goal.projection indices must be distinct and non-negative")
        if center.size != len(projection) and center.size <= max(projection):
            raise InvalidScenarioError("goal.center does not cover the projection indices")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", radius)
        object.__setattr__(self, "projection", projection)

    @property
    def projected_center(self) -> np.ndarray:
        if self.center.size == len(self.projection):
            return self.center
        return self.center[list(self.projection)]


def project_to_goal_distance(x: State, goal: GoalRegion) -> float:
    """Euclidean distance between the projected coordinates of ``x`` and the goal."""

    if max(goal.projection) >= x.shape[-1]:
        raise InvalidScenarioError(
            f"goal projection {goal.projection} exceeds state dimension {x.shape[-1]}"
        )
    delta = x[list(goal.projection)] - goal.projected_center
    return float(np.sqrt(np.dot(delta, delta)))


def in_goal(x: State, goal: GoalRegion) -> bool:
    return project_to_goal_distance(x, goal) <= goal.radius
