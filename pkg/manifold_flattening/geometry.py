"""Point clouds, Euclidean distances and the frozen r-neighborhood graph."""
from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
import logging
import math
from typing import Any

import numpy as np
from scipy.spatial.distance import euclidean, pdist, squareform

from .const import DEFAULT_RADIUS_MULTIPLIER, DEFAULT_RADIUS_PERCENTILE
from .exceptions import UsageError

_LOGGER = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    """Return a read-only copy of an array."""
    copy = np.array(array, dtype=float, copy=True)
    copy.setflags(write=False)
    return copy


@dataclass(frozen=True, eq=False)
class PointCloud:
    """A discretized manifold: N points in R^n, identified by row index."""

    points: np.ndarray

    def __post_init__(self) -> None:
        """Validate shape and finiteness, then freeze the coordinates."""
        try:
            points = np.asarray(self.points, dtype=float)
        except (TypeError, ValueError) as err:
            raise UsageError(f"Point coordinates must be numeric: {err}") from err

        if points.ndim != 2:
            raise UsageError(f"Point cloud must be a 2-D array of shape (N, n), got {points.ndim}-D")
        if points.shape[0] < 1 or points.shape[1] < 1:
            raise UsageError(f"Point cloud needs N >= 1 points of dimension n >= 1, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(points), axis=1))[0])
            raise UsageError(f"Point {bad} has non-finite coordinates")

        object.__setattr__(self, "points", _frozen(points))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> PointCloud:
        """Build a cloud from a sequence of coordinate rows."""
        return cls(np.asarray(rows, dtype=float))

    @property
    def num_points(self) -> int:
        """Point count N."""
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        """Embedding dimension n."""
        return int(self.points.shape[1])

    def centroid(self) -> np.ndarray:
        """Mean position of the cloud."""
        return self.points.mean(axis=0)

    def moved_to(self, points: np.ndarray) -> PointCloud:
        """Return a cloud with the same identities at new positions."""
        points = np.asarray(points, dtype=float)
        if points.shape != self.points.shape:
            raise UsageError(f"Cannot move cloud of shape {self.points.shape} to {points.shape}")
        return PointCloud(points)

    def __len__(self) -> int:
        return self.num_points


@dataclass(frozen=True, eq=False)
class NeighborGraph:
    """Deleted r-neighborhoods decided once on M(0).

    `adjacency[i, j]` is True iff 0 < dist(i, j) < radius on the initial cloud, and
    `rest_lengths[i, j]` holds that initial distance (zero for non-neighbors).
    """

    radius: float
    adjacency: np.ndarray
    rest_lengths: np.ndarray
    neighbor_sets: tuple[tuple[int, ...], ...] = field(init=False)

    def __post_init__(self) -> None:
        """Freeze the matrices and derive the sorted neighbor sets."""
        adjacency = np.array(self.adjacency, dtype=bool, copy=True)
        adjacency.setflags(write=False)
        object.__setattr__(self, "adjacency", adjacency)
        object.__setattr__(self, "rest_lengths", _frozen(self.rest_lengths))
        object.__setattr__(
            self,
            "neighbor_sets",
            tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in adjacency),
        )

    @property
    def num_points(self) -> int:
        """Number of vertices."""
        return int(self.adjacency.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        """Neighbor count per point."""
        return self.adjacency.sum(axis=1)

    @property
    def isolated_points(self) -> list[int]:
        """Indices with an empty neighborhood."""
        return [int(i) for i in np.flatnonzero(self.degrees == 0)]

    @property
    def num_pairs(self) -> int:
        """Number of unordered neighbor pairs."""
        return int(np.count_nonzero(np.triu(self.adjacency, k=1)))

    def pairs(self) -> Iterator[tuple[int, int]]:
        """Iterate unordered neighbor pairs (i < j) in index order."""
        rows, cols = np.nonzero(np.triu(self.adjacency, k=1))
        for i, j in zip(rows, cols):
            yield int(i), int(j)

    @property
    def initial_distances(self) -> dict[tuple[int, int], float]:
        """Initial distance for every neighbor pair (i < j)."""
        return {(i, j): float(self.rest_lengths[i, j]) for i, j in self.pairs()}

    def initial_distance(self, i: int, j: int) -> float:
        """Initial distance between two neighbors."""
        if not self.adjacency[i, j]:
            raise UsageError(f"Points {i} and {j} are not neighbors")
        return float(self.rest_lengths[i, j])

    def summary(self) -> dict[str, Any]:
        """Short JSON-ready description."""
        degrees = self.degrees
        return {
            "radius": self.radius,
            "pairs": self.num_pairs,
            "min_degree": int(degrees.min()),
            "max_degree": int(degrees.max()),
            "isolated_points": len(self.isolated_points),
        }


def euclidean_distance(a: Sequence[float] | np.ndarray, b: Sequence[float] | np.ndarray) -> float:
    """Euclidean distance between two coordinate vectors of the same dimension."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise UsageError(f"Dimension mismatch: {a.shape} vs {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise UsageError("Coordinates must be finite")
    return float(euclidean(a, b))


def pairwise_distances(cloud: PointCloud | np.ndarray) -> np.ndarray:
    """Symmetric N x N matrix of Euclidean distances.

    Every component that compares current and initial distances goes through this
    one kernel, so quantities that should vanish at t = 0 vanish exactly.
    """
    points = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    return squareform(pdist(points))


def duplicate_pairs(cloud: PointCloud, distances: np.ndarray | None = None) -> list[tuple[int, int]]:
    """Index pairs (i < j) of coincident points."""
    if distances is None:
        distances = pairwise_distances(cloud)
    rows, cols = np.nonzero(np.triu(distances == 0.0, k=1))
    return [(int(i), int(j)) for i, j in zip(rows, cols)]


def build_neighbor_graph(cloud: PointCloud, r: float) -> NeighborGraph:
    """
    Build the deleted r-neighborhood graph of the initial manifold.

    Point q is a neighbor of p iff 0 < dist(p, q) < r, both strict. The graph is
    decided on M(0) and never recomputed during a run.

    Args:
        cloud: The initial manifold M(0)
        r: Neighborhood radius in embedding units

    Returns:
        The frozen neighbor graph with initial pair distances
    """
    try:
        radius = float(r)
    except (TypeError, ValueError) as err:
        raise UsageError(f"Neighborhood radius must be a number, got {r!r}") from err
    if not math.isfinite(radius) or radius <= 0:
        raise UsageError(f"Neighborhood radius must be a positive finite number, got {r!r}")

    distances = pairwise_distances(cloud)
    adjacency = (distances > 0.0) & (distances < radius)
    rest_lengths = np.where(adjacency, distances, 0.0)
    graph = NeighborGraph(radius=radius, adjacency=adjacency, rest_lengths=rest_lengths)

    duplicates = duplicate_pairs(cloud, distances)
    if duplicates:
        _LOGGER.warning(
            "%d pair(s) of coincident points (first: %s); they are excluded from each other's "
            "neighborhoods and contribute no repulsion",
            len(duplicates),
            duplicates[0],
        )

    isolated = graph.isolated_points
    if isolated:
        _LOGGER.warning(
            "%d point(s) have an empty %.6g-neighborhood (first: %d); only repulsion acts on them",
            len(isolated),
            radius,
            isolated[0],
        )

    _LOGGER.debug("Built neighbor graph: %s", graph.summary())
    return graph


def suggest_radius(
    cloud: PointCloud,
    percentile: float = DEFAULT_RADIUS_PERCENTILE,
    multiplier: float = DEFAULT_RADIUS_MULTIPLIER,
) -> float:
    """
    Default neighborhood radius for clouds without a known r.

    Args:
        cloud: The initial manifold
        percentile: Percentile of the nonzero pairwise distances (0-100)
        multiplier: Factor applied to that percentile

    Returns:
        The suggested radius
    """
    if not 0 < percentile <= 100:
        raise UsageError(f"Percentile must be in (0, 100], got {percentile}")
    if multiplier <= 0:
        raise UsageError(f"Radius multiplier must be positive, got {multiplier}")

    distances = pdist(cloud.points)
    distances = distances[distances > 0]
    if distances.size == 0:
        raise UsageError("Cannot suggest a radius: the cloud has no pair of distinct points")

    radius = float(np.percentile(distances, percentile)) * multiplier
    _LOGGER.info("Suggested neighborhood radius %.6g (p%g x %g)", radius, percentile, multiplier)
    return radius
