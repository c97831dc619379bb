"""Kinodynamic RRT over an arbitrary system.

The engine knows nothing about costs: it is handed a sampler, a validity
checker and an embedding of states into the metric space of an
:class:`NnIndex`.  :func:`rrt_over_augmented_system` binds it to the
augmented system ``F`` over ``Y = X x R+``; run with the same random stream
and a fixed ``c_max``, that binding grows the same tree as AO-RRT, node for
node and bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from aoplan.core.errors import PropagationDivergedError
from aoplan.core.random_stream import RandomStream
from aoplan.core.types import AugmentedState, ControlSegment, State, Trajectory
from aoplan.dynamics.integrate import IntegratorConfig, propagate
from aoplan.dynamics.systems import SystemDefinition
from aoplan.geometry.obstacles import collision_free
from aoplan.metric.nn_index import MetricWeights, NnIndex
from aoplan.planners.params import PlannerParams
from aoplan.planners.sampling import sample_control, sample_cost, sample_duration, sample_target
from aoplan.scenarios.model import Scenario

# One iteration's draw: target state, control, duration.
Sampler = Callable[[], tuple[np.ndarray, np.ndarray, float]]
ValidityChecker = Callable[[Trajectory], bool]
Embedding = Callable[[State], AugmentedState]


def _state_embedding(x: State) -> AugmentedState:
    return AugmentedState(x, 0.0)


@dataclass(frozen=True, slots=True)
class GenericNode:
    id: int
    state: State
    parent: int | None
    segment: ControlSegment | None


class GenericRrt:
    def __init__(
        self,
        system: SystemDefinition,
        x_init: State,
        sampler: Sampler,
        is_valid: ValidityChecker,
        integrator: IntegratorConfig,
        *,
        weights: MetricWeights | None = None,
        embed: Embedding = _state_embedding,
    ) -> None:
        self.system = system
        self.sampler = sampler
        self.is_valid = is_valid
        self.integrator = integrator
        self.embed = embed
        self.index = NnIndex(weights or MetricWeights(1.0, 0.0))
        root = np.array(x_init, dtype=np.float64)
        root.setflags(write=False)
        self.nodes: list[GenericNode] = [GenericNode(0, root, None, None)]
        self.index.insert(0, embed(root))
        self.rejections = 0

    def __len__(self) -> int:
        return len(self.nodes)

    def step(self) -> int | None:
        target, u, duration = self.sampler()
        near = self.index.nearest(self.embed(target))
        try:
            trajectory = propagate(self.nodes[near].state, u, duration, self.system, self.integrator)
        except PropagationDivergedError:
            self.rejections += 1
            return None
        if not self.is_valid(trajectory):
            self.rejections += 1
            return None
        node = GenericNode(len(self.nodes), trajectory.final_state, near, trajectory.segments[0])
        self.nodes.append(node)
        self.index.insert(node.id, self.embed(node.state))
        return node.id

    def run(self, iterations: int) -> int:
        for _ in range(iterations):
            self.step()
        return len(self.nodes)


def rrt_over_augmented_system(scenario: Scenario, params: PlannerParams, stream: RandomStream) -> GenericRrt:
    """Generic RRT on ``F``: states are ``(x, c)`` vectors, the cost is just a coordinate."""

    base = scenario.system
    d = base.state_dim
    integrator = scenario.integrator(params)
    resolution = params.collision_resolution or integrator.step
    bounds = base.state_bounds

    def sampler() -> tuple[np.ndarray, np.ndarray, float]:
        x_rand = sample_target(stream, bounds, scenario.goal, params.goal_bias)
        c_rand = sample_cost(stream, params.c_max)
        t_rand = sample_duration(stream, params.t_prop)
        u_rand = sample_control(stream, base.control_bounds)
        return np.append(x_rand, c_rand), u_rand, t_rand

    def is_valid(trajectory: Trajectory) -> bool:
        positions = Trajectory(trajectory.times, trajectory.states[:, :d], trajectory.segments)
        return collision_free(positions, scenario.obstacles, resolution)

    return GenericRrt(
        scenario.augmented.as_system(params.c_max),
        np.append(scenario.x_init, 0.0),
        sampler,
        is_valid,
        integrator,
        weights=params.weights,
        embed=lambda y: AugmentedState(y[:d], y[d]),
    )
