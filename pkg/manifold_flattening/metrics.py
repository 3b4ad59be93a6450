"""Flattening, topology-preservation and intrinsic-dimension measurements."""
from __future__ import annotations

from dataclasses import asdict, dataclass
import logging
from typing import Any

import numpy as np
from scipy.linalg import svd
from scipy.spatial.distance import pdist

from .const import DEFAULT_DIMENSION_THRESHOLD, DEFAULT_EPSILON_ADHESION
from .dynamics import FieldParams, ManifoldState, compute_field
from .exceptions import InstabilityError, UsageError
from .geometry import NeighborGraph, PointCloud, pairwise_distances

_LOGGER = logging.getLogger(__name__)

# Slack when comparing cumulative explained variance with the threshold
_CUMULATIVE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class SpectrumReport:
    """Singular values of the centered cloud and the dimension they reveal."""

    singular_values: tuple[float, ...]
    explained_variance: tuple[float, ...]
    dimension: int
    threshold: float

    def as_dict(self) -> dict[str, Any]:
        """JSON-ready form."""
        return {
            "singular_values": list(self.singular_values),
            "explained_variance": list(self.explained_variance),
            "dimension": self.dimension,
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class DistortionStats:
    """Relative change of neighbor-pair distances since t = 0."""

    max: float
    rms: float
    pairs: int


@dataclass(frozen=True)
class AdhesionReport:
    """Closest approaches between points and the drift of the centroid."""

    min_distance: float | None
    min_non_neighbor_distance: float | None
    min_neighbor_distance: float | None
    adhesion: bool
    centroid_drift: float


@dataclass(frozen=True)
class TopologyReport:
    """Data behind the no-adhesion, neighbors-kept condition."""

    max_distortion: float
    rms_distortion: float
    min_distance: float | None
    min_non_neighbor_distance: float | None
    min_neighbor_distance: float | None
    adhesion: bool
    centroid_drift: float

    def as_dict(self) -> dict[str, Any]:
        """JSON-ready form."""
        return asdict(self)


def _upper_pairs(num_points: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(num_points, k=1)


def _min_or_none(values: np.ndarray) -> float | None:
    return float(values.min()) if values.size else None


def neighbor_distortion(state: ManifoldState, graph: NeighborGraph) -> DistortionStats:
    """
    Relative distortion | |p_i - p_j| - d_ij(0) | / d_ij(0) over all neighbor pairs.

    Args:
        state: Current manifold state
        graph: Neighbor graph built on state.initial

    Returns:
        Max and RMS distortion; both zero for an empty graph
    """
    if graph.num_points != state.current.num_points:
        raise UsageError(f"Neighbor graph has {graph.num_points} points but the state has {state.current.num_points}")

    rows, cols = np.nonzero(np.triu(graph.adjacency, k=1))
    if rows.size == 0:
        _LOGGER.warning("Neighbor graph has no pairs; distortion reported as zero")
        return DistortionStats(max=0.0, rms=0.0, pairs=0)

    current = pairwise_distances(state.current)[rows, cols]
    rest = graph.rest_lengths[rows, cols]
    delta = np.abs(current - rest) / rest
    return DistortionStats(max=float(delta.max()), rms=float(np.sqrt(np.mean(delta**2))), pairs=int(rows.size))


def adhesion_check(
    state: ManifoldState,
    epsilon_adhesion: float = DEFAULT_EPSILON_ADHESION,
    graph: NeighborGraph | None = None,
) -> AdhesionReport:
    """
    Look for distinct points that have moved onto one position.

    Without a graph, the non-neighbor and neighbor minima cover all pairs and
    no pairs respectively.

    Args:
        state: Current manifold state
        epsilon_adhesion: Distance below which two points count as adhered
        graph: Neighbor graph used to split the pairs

    Returns:
        Minimum distances, the adhesion flag and the centroid drift
    """
    if not epsilon_adhesion >= 0:
        raise UsageError(f"epsilon_adhesion must be >= 0, got {epsilon_adhesion}")

    num_points = state.current.num_points
    rows, cols = _upper_pairs(num_points)
    distances = pdist(state.current.points)
    if graph is not None:
        is_neighbor = graph.adjacency[rows, cols]
    else:
        is_neighbor = np.zeros(distances.shape, dtype=bool)

    min_distance = _min_or_none(distances)
    adhesion = min_distance is not None and min_distance < epsilon_adhesion
    drift = float(np.linalg.norm(state.current.centroid() - state.initial.centroid()))

    if adhesion:
        index = int(np.argmin(distances))
        _LOGGER.warning(
            "Points %d and %d adhered: distance %.3e < %.3e",
            int(rows[index]),
            int(cols[index]),
            min_distance,
            epsilon_adhesion,
        )

    return AdhesionReport(
        min_distance=min_distance,
        min_non_neighbor_distance=_min_or_none(distances[~is_neighbor]),
        min_neighbor_distance=_min_or_none(distances[is_neighbor]),
        adhesion=adhesion,
        centroid_drift=drift,
    )


def topology_report(
    state: ManifoldState,
    graph: NeighborGraph,
    epsilon_adhesion: float = DEFAULT_EPSILON_ADHESION,
) -> TopologyReport:
    """Neighbor distortion and adhesion data in one report."""
    distortion = neighbor_distortion(state, graph)
    adhesion = adhesion_check(state, epsilon_adhesion, graph)
    return TopologyReport(
        max_distortion=distortion.max,
        rms_distortion=distortion.rms,
        min_distance=adhesion.min_distance,
        min_non_neighbor_distance=adhesion.min_non_neighbor_distance,
        min_neighbor_distance=adhesion.min_neighbor_distance,
        adhesion=adhesion.adhesion,
        centroid_drift=adhesion.centroid_drift,
    )


def spectrum(cloud: PointCloud, threshold: float = DEFAULT_DIMENSION_THRESHOLD) -> SpectrumReport:
    """
    Covariance spectrum of the cloud and the linear intrinsic dimension.

    The cloud is centered at its mean and the singular values of the N x n
    coordinate matrix are taken, padded with zeros to length n. The dimension is
    the smallest d whose leading d components explain at least `threshold` of the
    variance, and 0 for a cloud collapsed to a single position.

    Args:
        cloud: Point cloud with N >= 2
        threshold: Cumulative explained-variance threshold in (0, 1]

    Returns:
        The spectrum report
    """
    if cloud.num_points < 2:
        raise UsageError(f"Spectrum needs at least 2 points, got {cloud.num_points}")
    if not 0 < threshold <= 1:
        raise UsageError(f"Dimension threshold must be in (0, 1], got {threshold}")

    centered = cloud.points - cloud.centroid()
    values = svd(centered, compute_uv=False, lapack_driver="gesdd")
    padded = np.zeros(cloud.dim)
    padded[: values.size] = values

    variance = padded**2
    total = float(variance.sum())
    if total == 0.0:
        ratios = np.zeros(cloud.dim)
        dimension = 0
    else:
        ratios = variance / total
        reached = np.cumsum(ratios) >= threshold - _CUMULATIVE_TOLERANCE
        dimension = int(np.argmax(reached)) + 1 if reached.any() else cloud.dim

    return SpectrumReport(
        singular_values=tuple(float(v) for v in padded),
        explained_variance=tuple(float(v) for v in ratios),
        dimension=dimension,
        threshold=threshold,
    )


def flatness_ratio(cloud: PointCloud, d: int) -> float:
    """
    How far the cloud is from lying in a d-dimensional affine subspace.

    Args:
        cloud: Point cloud in R^n
        d: Target dimension, 1 <= d < n

    Returns:
        sigma_(d+1) / sigma_1, or 0 when sigma_1 is 0
    """
    if not 1 <= d < cloud.dim:
        raise UsageError(f"Flatness dimension must satisfy 1 <= d < {cloud.dim}, got {d}")
    report = spectrum(cloud)
    largest = report.singular_values[0]
    if largest == 0.0:
        return 0.0
    return report.singular_values[d] / largest


def flattening_potential(state: ManifoldState, graph: NeighborGraph, params: FieldParams) -> float:
    """
    Scalar whose gradient with respect to each point is the flattening field.

    K2 * sum of non-neighbor distances minus K1/2 * sum of squared neighbor
    stretches, each unordered pair counted once. Small Euler steps never decrease it.
    """
    rows, cols = _upper_pairs(state.current.num_points)
    distances = pairwise_distances(state.current)[rows, cols]
    is_neighbor = graph.adjacency[rows, cols]
    stretch = distances[is_neighbor] - graph.rest_lengths[rows, cols][is_neighbor]
    return float(params.k2 * distances[~is_neighbor].sum() - 0.5 * params.k1 * np.sum(stretch**2))


def max_extent(cloud: PointCloud) -> float:
    """Largest pairwise distance in the cloud."""
    distances = pdist(cloud.points)
    return float(distances.max()) if distances.size else 0.0


def snapshot_metrics(
    state: ManifoldState,
    graph: NeighborGraph,
    params: FieldParams,
    epsilon_adhesion: float = DEFAULT_EPSILON_ADHESION,
    threshold: float = DEFAULT_DIMENSION_THRESHOLD,
) -> dict[str, Any]:
    """Every per-snapshot measurement as a JSON-ready dict."""
    cloud = state.current
    try:
        max_field: float | None = compute_field(state, graph, params).max_magnitude
    except InstabilityError:
        max_field = None
    report: dict[str, Any] = {
        "step": state.step_index,
        "time": state.time,
        "topology": topology_report(state, graph, epsilon_adhesion).as_dict(),
        "max_extent": max_extent(cloud),
        "potential": flattening_potential(state, graph, params),
        "max_field": max_field,
    }
    if cloud.num_points >= 2:
        report["spectrum"] = spectrum(cloud, threshold).as_dict()
        report["flatness"] = {str(d): flatness_ratio(cloud, d) for d in range(1, cloud.dim)}
    return report
