"""Weighted state-cost metric and an exact nearest-neighbor index.

``dist(y_a, y_b) = sqrt(w_x |x_a - x_b|^2 + w_c |c_a - c_b|^2)``.  The index
stores points scaled by ``(sqrt(w_x), ..., sqrt(w_c))`` in a
``scipy.spatial.cKDTree`` so plain Euclidean queries rank entries exactly
as the weighted metric does.  Candidates returned by the tree are re-ranked
with :func:`weighted_distances`, the same routine the linear scan uses, and
ties go to the smallest node id.

The tree is static: new entries wait in a small buffer that is scanned
linearly until the next rebuild, and deletions are tombstones compacted away
once more than half the stored rows are dead.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import isfinite, sqrt

import numpy as np
from scipy.spatial import cKDTree

from aoplan.config import get_settings
from aoplan.core.errors import IndexStateError, InvalidScenarioError, ParameterError
from aoplan.core.types import AugmentedState

logger = logging.getLogger(__name__)

# Relative and absolute widening of the kd-tree candidate ball.
_BALL_SLACK = 1e-9
_BALL_FLOOR = 1e-12


@dataclass(frozen=True, slots=True)
class MetricWeights:
    w_x: float = 1.0
    w_c: float = 1.0

    def __post_init__(self) -> None:
        w_x, w_c = float(self.w_x), float(self.w_c)
        if not (isfinite(w_x) and isfinite(w_c)) or w_x < 0.0 or w_c < 0.0:
            raise ParameterError("metric weights must be finite and non-negative")
        if w_x + w_c <= 0.0:
            raise ParameterError("at least one metric weight must be positive")
        object.__setattr__(self, "w_x", w_x)
        object.__setattr__(self, "w_c", w_c)

    @classmethod
    def geometric_demo(cls) -> "MetricWeights":
        return cls(1.0, 0.2)

    def scale(self, state_dim: int) -> np.ndarray:
        return np.append(np.full(state_dim, sqrt(self.w_x)), sqrt(self.w_c))


WEIGHT_PRESETS: dict[str, MetricWeights] = {
    "equal": MetricWeights(1.0, 1.0),
    "geometric": MetricWeights.geometric_demo(),
    "state-only": MetricWeights(1.0, 0.0),
}


def weighted_distances(points: np.ndarray, query: np.ndarray, weights: MetricWeights) -> np.ndarray:
    """Weighted distance from every row of ``points`` (``(n, d+1)``) to ``query``."""

    dx = points[:, :-1] - query[:-1]
    dc = points[:, -1] - query[-1]
    return np.sqrt(weights.w_x * np.einsum("ij,ij->i", dx, dx) + weights.w_c * (dc * dc))


def dist(y_a: AugmentedState, y_b: AugmentedState, weights: MetricWeights) -> float:
    if y_a.x.shape != y_b.x.shape:
        raise InvalidScenarioError(f"state dimensions differ: {y_a.x.shape} vs {y_b.x.shape}")
    return float(weighted_distances(y_a.vector[None, :], y_b.vector, weights)[0])


class NnIndex:
    """Exact 1-NN over live tree vertices in the weighted state-cost metric."""

    INITIAL_CAPACITY = 256
    MIN_PENDING = 64

    def __init__(self, weights: MetricWeights, check: bool | None = None) -> None:
        self.weights = weights
        self.check = get_settings().nn_check if check is None else check
        self.rebuilds = 0
        self._dim: int | None = None
        self._scale: np.ndarray | None = None
        self._data = np.empty((0, 0))
        self._ids = np.empty(0, dtype=np.int64)
        self._alive = np.empty(0, dtype=bool)
        self._size = 0
        self._live = 0
        self._row: dict[int, int] = {}
        self._tree: cKDTree | None = None
        self._tree_rows = 0

    def __len__(self) -> int:
        return self._live

    def __contains__(self, node_id: int) -> bool:
        row = self._row.get(node_id)
        return row is not None and bool(self._alive[row])

    @property
    def dead_count(self) -> int:
        return self._size - self._live

    def live_ids(self) -> list[int]:
        return sorted(int(i) for i in self._ids[: self._size][self._alive[: self._size]])

    def _vector(self, y: AugmentedState) -> np.ndarray:
        vector = y.vector
        if self._dim is None:
            self._dim = vector.size
            self._scale = self.weights.scale(vector.size - 1)
            self._data = np.empty((self.INITIAL_CAPACITY, vector.size))
            self._ids = np.empty(self.INITIAL_CAPACITY, dtype=np.int64)
            self._alive = np.zeros(self.INITIAL_CAPACITY, dtype=bool)
        elif vector.size != self._dim:
            raise InvalidScenarioError(f"index holds {self._dim - 1}-d states, got {vector.size - 1}")
        return vector

    def insert(self, node_id: int, y: AugmentedState) -> None:
        if node_id in self._row:
            raise IndexStateError(f"node id {node_id} already indexed")
        vector = self._vector(y)
        if self._size == self._data.shape[0]:
            capacity = 2 * self._data.shape[0]
            self._data = np.resize(self._data, (capacity, self._dim))
            self._ids = np.resize(self._ids, capacity)
            alive = np.zeros(capacity, dtype=bool)
            alive[: self._size] = self._alive[: self._size]
            self._alive = alive
        row = self._size
        self._data[row] = vector
        self._ids[row] = node_id
        self._alive[row] = True
        self._row[node_id] = row
        self._size += 1
        self._live += 1
        if self._size - self._tree_rows > max(self.MIN_PENDING, self._tree_rows // 4):
            self._rebuild()

    def remove(self, node_id: int) -> bool:
        row = self._row.get(node_id)
        if row is None or not self._alive[row]:
            return False
        self._alive[row] = False
        self._live -= 1
        self._maybe_compact()
        return True

    def remove_above_cost(self, c_threshold: float) -> int:
        """Tombstone every live entry with ``c > c_threshold``."""

        if self._size == 0:
            return 0
        doomed = self._alive[: self._size] & (self._data[: self._size, -1] > c_threshold)
        removed = int(np.count_nonzero(doomed))
        if removed:
            self._alive[: self._size][doomed] = False
            self._live -= removed
            self._maybe_compact()
        return removed

    def nearest(self, y_query: AugmentedState) -> int:
        if self._live == 0:
            raise IndexStateError("nearest query on an empty index")
        query = self._vector(y_query)
        rows = self._candidate_rows(query)
        best = self._pick(rows, query)
        if self.check:
            expected = self.linear_scan_nearest(y_query)
            if expected != best:
                raise IndexStateError(f"kd-tree returned {best}, linear scan returned {expected}")
        return best

    def within(self, y_query: AugmentedState, radius: float) -> list[int]:
        """Live ids with ``dist <= radius``, sorted by id."""

        if self._live == 0:
            return []
        query = self._vector(y_query)
        rows = self._pending_rows()
        if self._tree is not None:
            scaled = query * self._scale
            hits = np.asarray(
                self._tree.query_ball_point(scaled, r=radius * (1.0 + _BALL_SLACK) + _BALL_FLOOR),
                dtype=np.int64,
            )
            rows = np.concatenate([hits[self._alive[hits]], rows]) if hits.size else rows
        if rows.size == 0:
            return []
        distances = weighted_distances(self._data[rows], query, self.weights)
        return sorted(int(i) for i in self._ids[rows[distances <= radius]])

    def linear_scan_nearest(self, y_query: AugmentedState) -> int:
        if self._live == 0:
            raise IndexStateError("nearest query on an empty index")
        query = self._vector(y_query)
        rows = np.flatnonzero(self._alive[: self._size])
        return self._pick(rows, query)

    def _pick(self, rows: np.ndarray, query: np.ndarray) -> int:
        distances = weighted_distances(self._data[rows], query, self.weights)
        tied = rows[distances == distances.min()]
        return int(self._ids[tied].min())

    def _pending_rows(self) -> np.ndarray:
        pending = np.arange(self._tree_rows, self._size)
        return pending[self._alive[pending]]

    def _candidate_rows(self, query: np.ndarray) -> np.ndarray:
        pending = self._pending_rows()
        if self._tree is None:
            return pending
        scaled = query * self._scale
        k = 1
        radius = None
        while True:
            distances, rows = self._tree.query(scaled, k=k)
            distances = np.atleast_1d(distances)
            rows = np.atleast_1d(rows)
            valid = rows < self._tree_rows
            live = valid.copy()
            live[valid] = self._alive[rows[valid]]
            if np.any(live):
                radius = float(distances[np.argmax(live)])
                break
            if k >= self._tree_rows:
                break
            k = min(4 * k, self._tree_rows)
        if radius is None:
            return pending
        hits = np.asarray(
            self._tree.query_ball_point(scaled, r=radius * (1.0 + _BALL_SLACK) + _BALL_FLOOR),
            dtype=np.int64,
        )
        hits = hits[self._alive[hits]]
        return np.concatenate([hits, pending])

    def _maybe_compact(self) -> None:
        if self._size and self.dead_count > 0.5 * self._size:
            keep = np.flatnonzero(self._alive[: self._size])
            count = keep.size
            self._data[:count] = self._data[keep]
            self._ids[:count] = self._ids[keep]
            self._alive[:count] = True
            self._alive[count:] = False
            self._size = count
            self._row = {int(node_id): row for row, node_id in enumerate(self._ids[:count])}
            self._rebuild()

    def _rebuild(self) -> None:
        self.rebuilds += 1
        self._tree_rows = self._size
        if self._size == 0:
            self._tree = None
            return
        self._tree = cKDTree(self._data[: self._size] * self._scale)
        logger.debug("rebuilt nn index over %d rows (%d live)", self._size, self._live)
