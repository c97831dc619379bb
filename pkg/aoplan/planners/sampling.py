"""Uniform draws for one planner iteration, each from its own named substream."""

from __future__ import annotations

import numpy as np

from aoplan.core.random_stream import RandomStream
from aoplan.core.types import Box, GoalRegion


def sample_state(stream: RandomStream, bounds: Box) -> np.ndarray:
    return stream.substream("state").uniform(bounds.lo, bounds.hi)


def sample_cost(stream: RandomStream, c_max: float) -> float:
    return float(stream.substream("cost").uniform(0.0, c_max))


def sample_duration(stream: RandomStream, t_prop: float) -> float:
    return float(stream.substream("duration").uniform(0.0, t_prop))


def sample_control(stream: RandomStream, bounds: Box) -> np.ndarray:
    return stream.substream("control").uniform(bounds.lo, bounds.hi)


def sample_in_goal(generator: np.random.Generator, goal: GoalRegion) -> np.ndarray:
    """Uniform point of the goal ball in its projected coordinates."""

    k = len(goal.projection)
    direction = generator.standard_normal(k)
    norm = float(np.sqrt(np.dot(direction, direction))) or 1.0
    radius = goal.radius * generator.random() ** (1.0 / k)
    return goal.projected_center + direction * (radius / norm)


def sample_target(stream: RandomStream, bounds: Box, goal: GoalRegion, goal_bias: float) -> np.ndarray:
    """``x_rand``: uniform on the state box, or pulled into the goal with probability ``goal_bias``.

    The goal coin is tossed every call so the goal substream stays aligned
    between runs that differ only in ``goal_bias``.
    """

    x_rand = sample_state(stream, bounds)
    generator = stream.substream("goal")
    if generator.random() < goal_bias:
        x_rand[list(goal.projection)] = sample_in_goal(generator, goal)
    return x_rand
