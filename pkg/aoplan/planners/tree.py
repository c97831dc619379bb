"""Planner tree over the state-cost space, path tracing and replay."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from aoplan.core.errors import TrajectoryValidationError
from aoplan.core.types import (
    AugmentedState,
    ControlSegment,
    State,
    Trajectory,
    concatenate_trajectories,
)
from aoplan.dynamics.integrate import IntegratorConfig, propagate_augmented
from aoplan.dynamics.systems import AugmentedSystem


@dataclass(slots=True)
class PlanNode:
    id: int
    y: AugmentedState
    parent: int | None
    segment: ControlSegment | None
    trajectory: Trajectory | None
    tag: str
    live: bool = True
    active: bool = True
    children: int = 0


@dataclass(frozen=True, slots=True)
class Solution:
    """Root-to-node trajectory with its piecewise-constant control schedule."""

    node_id: int
    cost: float
    trajectory: Trajectory
    schedule: tuple[ControlSegment, ...]


def _point_trajectory(x: State) -> Trajectory:
    return Trajectory(np.zeros(1), np.array([x]), (), 0.0)


class PlanTree:
    """Rooted tree; removed nodes keep their slot so ids stay stable."""

    def __init__(self, x_init: State) -> None:
        root = PlanNode(0, AugmentedState(x_init, 0.0), None, None, None, "root")
        self.nodes: list[PlanNode] = [root]
        self.pruned = 0
        self._live = 1
        self._max_cost: float | None = 0.0

    def __len__(self) -> int:
        return self._live

    def __getitem__(self, node_id: int) -> PlanNode:
        return self.nodes[node_id]

    @property
    def root(self) -> PlanNode:
        return self.nodes[0]

    def live_nodes(self) -> Iterator[PlanNode]:
        return (node for node in self.nodes if node.live)

    def add(
        self,
        parent_id: int,
        y: AugmentedState,
        segment: ControlSegment,
        trajectory: Trajectory,
        tag: str,
    ) -> int:
        parent = self.nodes[parent_id]
        if not parent.live:
            raise TrajectoryValidationError(f"parent {parent_id} has been removed")
        node_id = len(self.nodes)
        self.nodes.append(PlanNode(node_id, y, parent_id, segment, trajectory, tag))
        parent.children += 1
        self._live += 1
        if self._max_cost is not None and y.c > self._max_cost:
            self._max_cost = y.c
        return node_id

    def max_live_cost(self) -> float:
        if self._max_cost is None:
            self._max_cost = max(node.y.c for node in self.live_nodes())
        return self._max_cost

    def remove(self, node_id: int) -> None:
        node = self.nodes[node_id]
        if node_id == 0 or not node.live:
            return
        node.live = False
        node.active = False
        self._live -= 1
        self.pruned += 1
        if node.parent is not None:
            self.nodes[node.parent].children -= 1
        if self._max_cost is not None and node.y.c >= self._max_cost:
            self._max_cost = None

    def prune_above(self, c_best: float) -> list[int]:
        """Remove every node with ``c > c_best``; subtree-closed since costs grow along edges."""

        doomed = [node.id for node in self.live_nodes() if node.y.c > c_best and node.id != 0]
        for node_id in doomed:
            self.remove(node_id)
        return doomed

    def path_to(self, node_id: int) -> list[PlanNode]:
        path = []
        current: int | None = node_id
        while current is not None:
            node = self.nodes[current]
            path.append(node)
            current = node.parent
        path.reverse()
        return path

    def trace_path(self, node_id: int) -> Solution:
        path = self.path_to(node_id)
        edges = [node for node in path[1:]]
        if not edges:
            trajectory = _point_trajectory(path[0].y.x)
        else:
            trajectory = concatenate_trajectories([node.trajectory for node in edges])
        return Solution(
            node_id=node_id,
            cost=self.nodes[node_id].y.c,
            trajectory=trajectory,
            schedule=tuple(node.segment for node in edges),
        )

    def verify(self, system: AugmentedSystem, cfg: IntegratorConfig) -> None:
        """Exact bookkeeping and re-propagation check over all live nodes."""

        root = self.root
        if root.y.c != 0.0 or root.parent is not None:
            raise TrajectoryValidationError("root must have zero cost and no parent")
        for node in self.live_nodes():
            if node.parent is None:
                continue
            parent = self.nodes[node.parent]
            if not parent.live:
                raise TrajectoryValidationError(f"node {node.id} hangs off removed node {parent.id}")
            if parent.y.c + node.trajectory.cost != node.y.c:
                raise TrajectoryValidationError(
                    f"node {node.id}: cost {node.y.c!r} != parent {parent.y.c!r} + edge {node.trajectory.cost!r}"
                )
            replayed, _ = propagate_augmented(parent.y, node.segment.u, node.segment.duration, system, cfg)
            if not np.array_equal(replayed.x, node.y.x) or replayed.c != node.y.c:
                raise TrajectoryValidationError(f"node {node.id}: re-propagation does not reproduce the state")


def replay_schedule(
    x_init: State,
    schedule: Sequence[ControlSegment],
    system: AugmentedSystem,
    cfg: IntegratorConfig,
) -> tuple[AugmentedState, Trajectory]:
    """Execute a piecewise-constant control schedule from ``x_init``."""

    y = AugmentedState(x_init, 0.0)
    parts: list[Trajectory] = []
    for segment in schedule:
        y, part = propagate_augmented(y, segment.u, segment.duration, system, cfg)
        parts.append(part)
    if not parts:
        return y, _point_trajectory(y.x)
    return y, concatenate_trajectories(parts)
