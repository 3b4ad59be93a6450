"""Test point clouds, distances and the neighbor graph."""
from __future__ import annotations

import logging
import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from manifold_flattening.exceptions import UsageError
from manifold_flattening.generators import gen_half_circle
from manifold_flattening.geometry import (
    PointCloud,
    build_neighbor_graph,
    duplicate_pairs,
    euclidean_distance,
    pairwise_distances,
    suggest_radius,
)

from .conftest import chain_cloud, random_cloud


def test_euclidean_distance_pythagorean():
    """Test the 3-4-5 triangle."""
    assert euclidean_distance((0.0, 0.0), (3.0, 4.0)) == 5.0


def test_euclidean_distance_rejects_mismatch_and_nan():
    """Test dimension mismatch and non-finite input are usage errors."""
    with pytest.raises(UsageError):
        euclidean_distance((0.0, 0.0), (1.0, 2.0, 3.0))
    with pytest.raises(UsageError):
        euclidean_distance((0.0, float("nan")), (1.0, 2.0))


def test_point_cloud_validation():
    """Test shape and finiteness checks on construction."""
    with pytest.raises(UsageError):
        PointCloud(np.zeros(3))
    with pytest.raises(UsageError):
        PointCloud(np.zeros((0, 2)))
    with pytest.raises(UsageError, match="Point 1"):
        PointCloud.from_rows([[0.0, 0.0], [np.inf, 1.0]])


def test_point_cloud_is_read_only():
    """Test coordinates cannot be modified in place."""
    cloud = chain_cloud(3)
    with pytest.raises(ValueError):
        cloud.points[0, 0] = 5.0


def test_pairwise_distances_symmetric_zero_diagonal():
    """Test the distance matrix is symmetric with a zero diagonal."""
    distances = pairwise_distances(random_cloud(3, 12, 3))
    np.testing.assert_array_equal(distances, distances.T)
    np.testing.assert_array_equal(np.diag(distances), np.zeros(12))


def test_half_circle_graph_adjacent_only():
    """Test r = 3.36 links each half-circle sample to its immediate neighbors only."""
    graph = build_neighbor_graph(gen_half_circle(), 3.36)

    assert graph.neighbor_sets[0] == (1,)
    assert graph.neighbor_sets[128] == (127,)
    for i in range(1, 128):
        assert graph.neighbor_sets[i] == (i - 1, i + 1)
    assert graph.num_pairs == 128


def test_half_circle_graph_two_step_radius():
    """Test r = 3.4 also captures the two-step chord of length ~3.3867."""
    graph = build_neighbor_graph(gen_half_circle(), 3.4)
    assert graph.neighbor_sets[64] == (62, 63, 65, 66)
    assert graph.initial_distance(62, 64) == pytest.approx(3.38669, abs=1e-5)


def test_neighborhood_boundary_is_strict():
    """Test points exactly r apart are not neighbors."""
    graph = build_neighbor_graph(PointCloud.from_rows([[0.0, 0.0], [1.0, 0.0]]), 1.0)
    assert not graph.adjacency[0, 1]
    assert graph.isolated_points == [0, 1]


def test_duplicate_points_excluded_with_warning(caplog):
    """Test coincident points are not neighbors of each other and are reported."""
    cloud = PointCloud.from_rows([[0.0, 0.0], [0.0, 0.0], [0.5, 0.0]])

    with caplog.at_level(logging.WARNING):
        graph = build_neighbor_graph(cloud, 1.0)

    assert duplicate_pairs(cloud) == [(0, 1)]
    assert not graph.adjacency[0, 1]
    assert graph.adjacency[0, 2] and graph.adjacency[1, 2]
    assert "coincident" in caplog.text


def test_isolated_point_warning(caplog):
    """Test an empty neighborhood is reported, not rejected."""
    cloud = PointCloud.from_rows([[0.0, 0.0], [0.5, 0.0], [10.0, 0.0]])

    with caplog.at_level(logging.WARNING):
        graph = build_neighbor_graph(cloud, 1.0)

    assert graph.isolated_points == [2]
    assert "empty" in caplog.text


@pytest.mark.parametrize("radius", [0.0, -1.0, float("nan"), float("inf"), "wide"])
def test_invalid_radius(radius):
    """Test non-positive, non-finite and non-numeric radii are rejected."""
    with pytest.raises(UsageError):
        build_neighbor_graph(chain_cloud(3), radius)


def test_graph_matrices_are_frozen():
    """Test the graph cannot be edited after construction."""
    graph = build_neighbor_graph(chain_cloud(4), 1.5)
    with pytest.raises(ValueError):
        graph.adjacency[0, 3] = True
    with pytest.raises(ValueError):
        graph.rest_lengths[0, 1] = 2.0


def test_initial_distance_lookup():
    """Test stored initial distances and the non-neighbor error."""
    graph = build_neighbor_graph(chain_cloud(4, spacing=0.5), 0.75)
    assert graph.initial_distance(1, 2) == 0.5
    assert graph.initial_distances == {(0, 1): 0.5, (1, 2): 0.5, (2, 3): 0.5}
    with pytest.raises(UsageError):
        graph.initial_distance(0, 2)


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    num_points=st.integers(min_value=1, max_value=25),
    dim=st.integers(min_value=1, max_value=4),
    radius=st.floats(min_value=0.1, max_value=8.0),
)
def test_graph_symmetric_and_irreflexive(seed, num_points, dim, radius):
    """Test adjacency is symmetric, irreflexive and matches a plain double loop."""
    cloud = random_cloud(seed, num_points, dim)
    graph = build_neighbor_graph(cloud, radius)
    rows = cloud.points.tolist()

    np.testing.assert_array_equal(graph.adjacency, graph.adjacency.T)
    assert not np.any(np.diag(graph.adjacency))
    for i, first in enumerate(rows):
        for j, second in enumerate(rows):
            distance = math.dist(first, second)
            expected = i != j and 0 < distance < radius
            assert bool(graph.adjacency[i, j]) is expected
            if expected:
                assert graph.rest_lengths[i, j] == pytest.approx(distance, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    num_points=st.integers(min_value=1, max_value=25),
    dim=st.integers(min_value=1, max_value=4),
    radii=st.tuples(st.floats(min_value=0.1, max_value=8.0), st.floats(min_value=0.1, max_value=8.0)),
)
def test_neighborhoods_grow_with_radius(seed, num_points, dim, radii):
    """Test every neighbor at a smaller radius stays a neighbor at a larger one."""
    small, large = sorted(radii)
    cloud = random_cloud(seed, num_points, dim)
    inner = build_neighbor_graph(cloud, small)
    outer = build_neighbor_graph(cloud, large)

    for i in range(num_points):
        assert set(inner.neighbor_sets[i]) <= set(outer.neighbor_sets[i])
    assert not np.any(inner.adjacency & ~outer.adjacency)


def test_suggest_radius_chain():
    """Test the heuristic on an evenly spaced chain gives twice the spacing."""
    assert suggest_radius(chain_cloud(11)) == pytest.approx(2.0)


def test_suggest_radius_needs_distinct_points():
    """Test a cloud of identical points has no suggested radius."""
    with pytest.raises(UsageError):
        suggest_radius(PointCloud.from_rows([[1.0, 1.0], [1.0, 1.0]]))
