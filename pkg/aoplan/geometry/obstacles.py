"""Obstacles in a projected workspace, free-space tests and clearance.

The free space is open: points on an obstacle surface or on the state-bounds
boundary are not free.  Obstacles constrain only their projected coordinates
(positions); every coordinate is constrained by the state bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from aoplan.core.errors import InvalidScenarioError
from aoplan.core.types import Box, GoalRegion, State, Trajectory, project_to_goal_distance

ObstacleKind = Literal["box", "ball"]


def _vector(values: Sequence[float] | np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, slots=True)
class Obstacle:
    kind: ObstacleKind
    projection: tuple[int, ...]
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float = 0.0

    def __post_init__(self) -> None:
        projection = tuple(int(i) for i in self.projection)
        if not projection or len(set(projection)) != len(projection):
            raise InvalidScenarioError("obstacle projection must list distinct indices")
        object.__setattr__(self, "projection", projection)
        if self.kind == "box":
            if self.lo is None or self.hi is None:
                raise InvalidScenarioError("box obstacle needs min and max corners")
            lo, hi = _vector(self.lo), _vector(self.hi)
            if lo.shape != (len(projection),) or hi.shape != lo.shape:
                raise InvalidScenarioError("box corners must match the obstacle projection")
            if not np.all(lo < hi):
                raise InvalidScenarioError("box obstacle needs min < max on every axis")
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
        elif self.kind == "ball":
            if self.center is None:
                raise InvalidScenarioError("ball obstacle needs a center")
            center = _vector(self.center)
            if center.shape != (len(projection),):
                raise InvalidScenarioError("ball center must match the obstacle projection")
            if not self.radius > 0.0:
                raise InvalidScenarioError("ball obstacle radius must be positive")
            object.__setattr__(self, "center", center)
            object.__setattr__(self, "radius", float(self.radius))
        else:
            raise InvalidScenarioError(f"unknown obstacle type {self.kind!r}")

    @classmethod
    def box(cls, lo: Sequence[float], hi: Sequence[float], projection: Sequence[int] = (0, 1)) -> "Obstacle":
        return cls(kind="box", projection=tuple(projection), lo=np.asarray(lo), hi=np.asarray(hi))

    @classmethod
    def ball(cls, center: Sequence[float], radius: float, projection: Sequence[int] = (0, 1)) -> "Obstacle":
        return cls(kind="ball", projection=tuple(projection), center=np.asarray(center), radius=radius)

    def _project(self, states: np.ndarray) -> np.ndarray:
        return states[:, list(self.projection)]

    def blocks(self, states: np.ndarray) -> np.ndarray:
        """Mask of rows lying in the closed obstacle."""

        points = self._project(states)
        if self.kind == "box":
            return np.all((points >= self.lo) & (points <= self.hi), axis=1)
        delta = points - self.center
        return np.einsum("ij,ij->i", delta, delta) <= self.radius * self.radius

    def distance(self, states: np.ndarray) -> np.ndarray:
        """Distance from each row to the obstacle (0 inside)."""

        points = self._project(states)
        if self.kind == "box":
            gap = np.maximum(np.maximum(self.lo - points, points - self.hi), 0.0)
            return np.sqrt(np.einsum("ij,ij->i", gap, gap))
        delta = points - self.center
        return np.maximum(np.sqrt(np.einsum("ij,ij->i", delta, delta)) - self.radius, 0.0)


@dataclass(frozen=True, slots=True)
class ObstacleSet:
    obstacles: tuple[Obstacle, ...]
    state_bounds: Box

    def __post_init__(self) -> None:
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        for obstacle in self.obstacles:
            if max(obstacle.projection) >= self.state_bounds.dim:
                raise InvalidScenarioError(
                    f"obstacle projection {obstacle.projection} exceeds state dimension {self.state_bounds.dim}"
                )

    def free_mask(self, states: np.ndarray) -> np.ndarray:
        states = np.atleast_2d(states)
        mask = np.all((states > self.state_bounds.lo) & (states < self.state_bounds.hi), axis=1)
        for obstacle in self.obstacles:
            mask &= ~obstacle.blocks(states)
        return mask

    def clearance_values(self, states: np.ndarray) -> np.ndarray:
        """Distance to the nearest obstacle or state-bounds face, clamped at 0."""

        states = np.atleast_2d(states)
        inside = np.minimum(states - self.state_bounds.lo, self.state_bounds.hi - states)
        values = np.maximum(np.min(inside, axis=1), 0.0)
        for obstacle in self.obstacles:
            values = np.minimum(values, obstacle.distance(states))
        return values

    def without(self, index: int) -> "ObstacleSet":
        kept = self.obstacles[:index] + self.obstacles[index + 1 :]
        return ObstacleSet(kept, self.state_bounds)


def is_free(x: State, obstacles: ObstacleSet) -> bool:
    if x.shape != (obstacles.state_bounds.dim,):
        raise InvalidScenarioError(f"state has shape {x.shape}, expected ({obstacles.state_bounds.dim},)")
    return bool(obstacles.free_mask(x)[0])


def densify(traj: Trajectory, resolution: float | None) -> np.ndarray:
    """Stored samples plus linear interpolants spaced at most ``resolution`` apart in time."""

    states = traj.states
    if len(traj) <= 1 or resolution is None:
        return states
    if not resolution > 0.0:
        raise InvalidScenarioError("collision resolution must be positive")
    gaps = np.diff(traj.times)
    counts = np.maximum(np.ceil(gaps / resolution - 1e-12).astype(np.int64), 1)
    starts = np.repeat(np.arange(gaps.size), counts)
    first = np.repeat(np.cumsum(counts) - counts, counts)
    fraction = (np.arange(starts.size) - first) / np.repeat(counts, counts)
    lower = states[starts]
    dense = lower + fraction[:, None] * (states[starts + 1] - lower)
    return np.vstack([dense, states[-1:]])


def collision_free(traj: Trajectory, obstacles: ObstacleSet, resolution: float | None = None) -> bool:
    """Every stored sample and interpolant at ``resolution`` lies in free space."""

    if len(traj) == 0:
        return True
    return bool(np.all(obstacles.free_mask(densify(traj, resolution))))


def clearance(
    traj: Trajectory,
    obstacles: ObstacleSet,
    goal: GoalRegion,
    resolution: float | None = None,
) -> float:
    """Largest tube radius around ``traj`` inside free space whose end ball sits in the goal.

    The tube term covers the whole polyline through the samples densified at
    ``resolution``, not only its vertices.  Clearance is 1-Lipschitz in the
    state, so a segment of length ``L`` whose ends have clearance ``d_a`` and
    ``d_b`` keeps at least ``(d_a + d_b - L) / 2`` along its length.  A
    positive result therefore implies :func:`collision_free` at any resolution.
    """

    if len(traj) == 0:
        raise InvalidScenarioError("clearance of an empty trajectory is undefined")
    dense = densify(traj, resolution)
    values = obstacles.clearance_values(dense)
    if len(dense) > 1:
        lengths = np.linalg.norm(np.diff(dense, axis=0), axis=1)
        values = 0.5 * (values[:-1] + values[1:] - lengths)
    tube = float(np.min(values))
    if not np.all(obstacles.free_mask(dense)):
        tube = 0.0
    goal_slack = goal.radius - project_to_goal_distance(traj.final_state, goal)
    return max(min(tube, goal_slack), 0.0)
