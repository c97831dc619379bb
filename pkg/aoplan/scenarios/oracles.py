"""Optimal-cost oracles for the oracle-tagged scenarios.

Two values are reported per scenario.  ``nominal`` is the optimum to the
goal centre.  ``lower_bound`` accounts for the goal radius and is the value
no valid planner solution may undercut.

Point robot: Euclidean shortest path through the visibility graph over
the start, the goal and the box corners, divided by the top speed.  A
segment is blocked when it crosses the open interior of a box, so paths may
graze corners and run along faces.

1D double integrator: bang-bang rest-to-rest time ``2 sqrt(d / a)``; the
lower bound is the fastest way to cover ``d - r`` while ending no faster
than ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import hypot, sqrt
from typing import Hashable, Sequence

import networkx as nx
import numpy as np

from aoplan.core.errors import OracleError
from aoplan.dynamics.systems import time_cost
from aoplan.geometry.obstacles import Obstacle, is_free
from aoplan.scenarios.model import Scenario

Point = tuple[float, float]
BoxBounds = tuple[Point, Point]

# Tolerance of the strict-interior test on clipped segments.
_INTERIOR_EPS = 1e-12
# Goal-disc boundary points tried when looking for a visible final leg.
_DISC_SAMPLES = 64


@dataclass(frozen=True, slots=True)
class OracleBound:
    nominal: float
    lower_bound: float


def _clip(p: Point, q: Point, box: BoxBounds) -> tuple[float, float] | None:
    """Liang-Barsky: parameter interval of ``p + t (q - p)`` inside the closed box."""

    (x_lo, y_lo), (x_hi, y_hi) = box
    dx, dy = q[0] - p[0], q[1] - p[1]
    t0, t1 = 0.0, 1.0
    for step, gap in ((-dx, p[0] - x_lo), (dx, x_hi - p[0]), (-dy, p[1] - y_lo), (dy, y_hi - p[1])):
        if step == 0.0:
            if gap < 0.0:
                return None
            continue
        t = gap / step
        if step < 0.0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    return t0, t1


def _strictly_inside(point: Point, box: BoxBounds) -> bool:
    (x_lo, y_lo), (x_hi, y_hi) = box
    return (
        x_lo + _INTERIOR_EPS < point[0] < x_hi - _INTERIOR_EPS
        and y_lo + _INTERIOR_EPS < point[1] < y_hi - _INTERIOR_EPS
    )


def segment_blocked(p: Point, q: Point, box: BoxBounds) -> bool:
    """True when the segment ``pq`` passes through the open interior of ``box``."""

    span = _clip(p, q, box)
    if span is None or span[1] - span[0] <= 0.0:
        return False
    t = 0.5 * (span[0] + span[1])
    return _strictly_inside((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])), box)


def visible(p: Point, q: Point, boxes: Sequence[BoxBounds]) -> bool:
    return not any(segment_blocked(p, q, box) for box in boxes)


def _distance(p: Point, q: Point) -> float:
    return hypot(q[0] - p[0], q[1] - p[1])


def _point_robot_boxes(scenario: Scenario, inflate: float = 0.0) -> list[BoxBounds]:
    boxes: list[BoxBounds] = []
    for obstacle in scenario.obstacles.obstacles:
        if obstacle.kind != "box" or obstacle.projection != (0, 1):
            raise OracleError("point-robot oracle needs box obstacles over coordinates (0, 1)")
        boxes.append(_box_bounds(obstacle, inflate))
    return boxes


def _box_bounds(obstacle: Obstacle, inflate: float) -> BoxBounds:
    lo, hi = obstacle.lo - inflate, obstacle.hi + inflate
    return (float(lo[0]), float(lo[1])), (float(hi[0]), float(hi[1]))


def _corners(box: BoxBounds) -> list[Point]:
    (x_lo, y_lo), (x_hi, y_hi) = box
    return [(x_lo, y_lo), (x_hi, y_lo), (x_hi, y_hi), (x_lo, y_hi)]


def visibility_graph(
    start: Point,
    goal: Point,
    boxes: Sequence[BoxBounds],
    bounds: BoxBounds,
) -> tuple[nx.Graph, dict[Hashable, Point]]:
    """Weighted graph over start, goal and usable box corners.

    Corner nodes are keyed ``(box_index, corner_index)`` so paths over
    inflated boxes can be compared with the original ones.
    """

    points: dict[Hashable, Point] = {"start": start, "goal": goal}
    (bx_lo, by_lo), (bx_hi, by_hi) = bounds
    for box_index, box in enumerate(boxes):
        for corner_index, corner in enumerate(_corners(box)):
            if not (bx_lo < corner[0] < bx_hi and by_lo < corner[1] < by_hi):
                continue
            if any(_strictly_inside(corner, other) for other in boxes):
                continue
            points[(box_index, corner_index)] = corner
    graph = nx.Graph()
    graph.add_nodes_from(points)
    keys = list(points)
    for i, a in enumerate(keys):
        for b in keys[i + 1 :]:
            if visible(points[a], points[b], boxes):
                graph.add_edge(a, b, weight=_distance(points[a], points[b]))
    return graph, points


def _top_speed(scenario: Scenario) -> float:
    system = scenario.system
    if system.name != "single_integrator_2d" or system.g is not time_cost:
        raise OracleError("point-robot oracle needs single_integrator_2d with time cost")
    params = system.params
    speed_limit = params.get("speed_limit")
    corner_speed = float(params.get("max_control", 1.0)) * sqrt(2.0)
    return min(float(speed_limit), corner_speed) if speed_limit is not None else corner_speed


def _planar(scenario: Scenario) -> tuple[Point, Point, BoxBounds]:
    goal = scenario.goal
    if goal.projection != (0, 1):
        raise OracleError("point-robot oracle needs a goal over coordinates (0, 1)")
    x_init = scenario.x_init
    center = goal.projected_center
    bounds = scenario.system.state_bounds
    return (
        (float(x_init[0]), float(x_init[1])),
        (float(center[0]), float(center[1])),
        ((float(bounds.lo[0]), float(bounds.lo[1])), (float(bounds.hi[0]), float(bounds.hi[1]))),
    )


def shortest_corner_path(scenario: Scenario, inflate: float = 0.0) -> tuple[float, list[Hashable]]:
    """Length and node sequence of the shortest start-to-goal-centre path."""

    start, goal, bounds = _planar(scenario)
    graph, _ = visibility_graph(start, goal, _point_robot_boxes(scenario, inflate), bounds)
    try:
        length, path = nx.single_source_dijkstra(graph, "start", "goal", weight="weight")
    except nx.NetworkXNoPath as exc:
        raise OracleError(f"scenario {scenario.name!r}: goal unreachable in the visibility graph") from exc
    return float(length), list(path)


def _disc_visible(v: Point, center: Point, radius: float, boxes: Sequence[BoxBounds]) -> bool:
    gap = _distance(v, center)
    if gap <= radius:
        return True
    targets = [
        (v[0] + (center[0] - v[0]) * (1.0 - radius / gap), v[1] + (center[1] - v[1]) * (1.0 - radius / gap)),
        center,
    ]
    angles = np.linspace(0.0, 2.0 * np.pi, _DISC_SAMPLES, endpoint=False)
    targets.extend((center[0] + radius * np.cos(a), center[1] + radius * np.sin(a)) for a in angles)
    return any(visible(v, target, boxes) for target in targets)


def oracle_point_robot(scenario: Scenario) -> OracleBound:
    speed = _top_speed(scenario)
    if not is_free(scenario.x_init, scenario.obstacles):
        raise OracleError("x_init is in collision")
    start, center, bounds = _planar(scenario)
    at_goal = np.array(scenario.x_init, dtype=np.float64)
    at_goal[:2] = center
    if not is_free(at_goal, scenario.obstacles):
        raise OracleError("goal centre is in collision")
    boxes = _point_robot_boxes(scenario)
    graph, points = visibility_graph(start, center, boxes, bounds)
    distances = nx.single_source_dijkstra_path_length(graph, "start", weight="weight")
    if "goal" not in distances:
        raise OracleError(f"scenario {scenario.name!r}: goal unreachable in the visibility graph")
    radius = scenario.goal.radius
    reach = min(
        length + max(_distance(points[node], center) - radius, 0.0)
        for node, length in distances.items()
        if node != "goal" and _disc_visible(points[node], center, radius, boxes)
    )
    return OracleBound(nominal=distances["goal"] / speed, lower_bound=min(reach, distances["goal"]) / speed)


def oracle_double_integrator(distance: float, accel: float) -> float:
    """Time-optimal rest-to-rest transfer over ``distance`` with ``|u| <= accel``."""

    if distance < 0.0 or not accel > 0.0:
        raise OracleError("double-integrator oracle needs distance >= 0 and accel > 0")
    return 2.0 * sqrt(distance / accel)


def double_integrator_lower_bound(distance: float, accel: float, radius: float) -> float:
    """Fastest arrival within ``radius`` of rest at ``distance`` in the (p, v) plane."""

    if distance < 0.0 or not accel > 0.0 or radius < 0.0:
        raise OracleError("double-integrator bound needs distance >= 0, accel > 0, radius >= 0")
    travel = max(distance - radius, 0.0)
    v_end = radius
    if v_end * v_end >= 2.0 * accel * travel:
        return sqrt(2.0 * travel / accel)
    v_peak = sqrt(accel * travel + 0.5 * v_end * v_end)
    return (2.0 * v_peak - v_end) / accel


def _double_integrator_bound(scenario: Scenario) -> OracleBound:
    system = scenario.system
    if system.name != "double_integrator_1d" or system.g is not time_cost:
        raise OracleError("double-integrator oracle needs double_integrator_1d with time cost")
    goal = scenario.goal
    if goal.projection != (0, 1):
        raise OracleError("double-integrator oracle needs a goal over (position, velocity)")
    center = goal.projected_center
    if scenario.x_init[1] != 0.0 or center[1] != 0.0:
        raise OracleError("double-integrator oracle covers rest-to-rest transfers only")
    distance = abs(float(center[0] - scenario.x_init[0]))
    accel = float(system.params.get("max_accel", system.control_bounds.hi[0]))
    return OracleBound(
        nominal=oracle_double_integrator(distance, accel),
        lower_bound=double_integrator_lower_bound(distance, accel, goal.radius),
    )


def scenario_oracle(scenario: Scenario) -> OracleBound:
    if scenario.oracle == "point_robot":
        return oracle_point_robot(scenario)
    if scenario.oracle == "double_integrator":
        return _double_integrator_bound(scenario)
    raise OracleError(f"scenario {scenario.name!r} has no oracle")


def oracle_homotopy_is_stable(scenario: Scenario, delta: float = 0.05) -> bool:
    """Inflating every box by ``delta`` keeps the same corner sequence."""

    if scenario.oracle != "point_robot":
        raise OracleError(f"scenario {scenario.name!r} has no point-robot oracle")
    _, nominal = shortest_corner_path(scenario)
    try:
        _, inflated = shortest_corner_path(scenario, inflate=delta)
    except OracleError:
        return False
    return nominal == inflated
