"""Test flattening and topology metrics."""
from __future__ import annotations

import logging

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from manifold_flattening.dynamics import FieldParams, ManifoldState, compute_field
from manifold_flattening.exceptions import UsageError
from manifold_flattening.generators import gen_half_circle, gen_s_curve
from manifold_flattening.geometry import PointCloud, build_neighbor_graph, pairwise_distances
from manifold_flattening.metrics import (
    adhesion_check,
    flatness_ratio,
    flattening_potential,
    max_extent,
    neighbor_distortion,
    snapshot_metrics,
    spectrum,
    topology_report,
)

from .conftest import chain_cloud, random_cloud


def test_distortion_zero_at_rest(half_circle):
    """Test neighbor distortion is exactly zero at t = 0."""
    graph = build_neighbor_graph(half_circle, 3.36)
    stats = neighbor_distortion(ManifoldState.at_rest(half_circle), graph)

    assert stats.max == 0.0
    assert stats.rms == 0.0
    assert stats.pairs == 128


def test_distortion_of_stretched_pair():
    """Test a pair stretched from 1.0 to 1.1 has distortion 0.1."""
    initial = PointCloud.from_rows([[0.0, 0.0], [1.0, 0.0]])
    state = ManifoldState(initial=initial, current=initial.moved_to([[0.0, 0.0], [1.1, 0.0]]))
    stats = neighbor_distortion(state, build_neighbor_graph(initial, 2.0))

    assert stats.max == pytest.approx(0.1, abs=1e-12)
    assert stats.rms == pytest.approx(0.1, abs=1e-12)


def test_distortion_empty_graph_warns(caplog):
    """Test an empty graph reports zero distortion with a warning."""
    cloud = PointCloud.from_rows([[0.0, 0.0], [5.0, 0.0]])
    graph = build_neighbor_graph(cloud, 1.0)

    with caplog.at_level(logging.WARNING):
        stats = neighbor_distortion(ManifoldState.at_rest(cloud), graph)

    assert (stats.max, stats.rms, stats.pairs) == (0.0, 0.0, 0)
    assert "no pairs" in caplog.text


def test_adhesion_flags():
    """Test a distinct cloud has no adhesion and a duplicated point does."""
    distinct = ManifoldState.at_rest(chain_cloud(4))
    assert not adhesion_check(distinct, 1e-6).adhesion

    duplicated = ManifoldState.at_rest(PointCloud.from_rows([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0]]))
    report = adhesion_check(duplicated, 1e-6)
    assert report.adhesion
    assert report.min_distance == 0.0


def test_adhesion_splits_neighbor_pairs():
    """Test minima are taken separately over neighbor and non-neighbor pairs."""
    cloud = PointCloud.from_rows([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
    graph = build_neighbor_graph(cloud, 1.5)
    report = adhesion_check(ManifoldState.at_rest(cloud), 1e-6, graph)

    assert report.min_neighbor_distance == 1.0
    assert report.min_non_neighbor_distance == 2.0
    assert report.centroid_drift == 0.0


def test_centroid_drift():
    """Test drift is the distance between initial and current centroids."""
    initial = chain_cloud(3)
    state = ManifoldState(initial=initial, current=initial.moved_to(initial.points + [3.0, 4.0]))

    assert adhesion_check(state).centroid_drift == pytest.approx(5.0)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    low=st.floats(min_value=0.0, max_value=2.0),
    high=st.floats(min_value=0.0, max_value=2.0),
)
def test_adhesion_monotone_in_epsilon(seed, low, high):
    """Test a larger epsilon never clears an adhesion flag."""
    low, high = sorted((low, high))
    state = ManifoldState.at_rest(random_cloud(seed, 10, 2, spread=3.0))

    if adhesion_check(state, low).adhesion:
        assert adhesion_check(state, high).adhesion


def test_topology_report_combines_checks(half_circle):
    """Test the combined report at t = 0."""
    graph = build_neighbor_graph(half_circle, 3.36)
    report = topology_report(ManifoldState.at_rest(half_circle), graph)

    assert report.max_distortion == 0.0
    assert not report.adhesion
    assert report.min_neighbor_distance == pytest.approx(1.69347, abs=1e-5)


def test_spectrum_collinear():
    """Test collinear points have one nonzero singular value."""
    report = spectrum(chain_cloud(6))

    assert report.dimension == 1
    assert report.singular_values[1] == pytest.approx(0.0, abs=1e-12)
    assert sum(report.explained_variance) == pytest.approx(1.0, abs=1e-9)


def test_spectrum_planar_grid():
    """Test a planar grid in R^3 has dimension 2."""
    xs, ys = np.meshgrid(np.arange(5.0), np.arange(4.0))
    cloud = PointCloud(np.column_stack((xs.ravel(), ys.ravel(), np.zeros(20))))
    report = spectrum(cloud)

    assert report.dimension == 2
    assert report.singular_values[2] == pytest.approx(0.0, abs=1e-12)


def test_spectrum_sorted_and_padded():
    """Test singular values are non-negative, descending and padded to n."""
    report = spectrum(PointCloud.from_rows([[0.0, 0.0, 0.0, 0.0], [1.0, 2.0, 3.0, 4.0]]))

    assert len(report.singular_values) == 4
    assert list(report.singular_values) == sorted(report.singular_values, reverse=True)
    assert min(report.singular_values) >= 0.0


def test_spectrum_of_collapsed_cloud():
    """Test a cloud at a single position has dimension 0 and zero flatness."""
    cloud = PointCloud.from_rows([[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]])

    assert spectrum(cloud).dimension == 0
    assert flatness_ratio(cloud, 1) == 0.0


def test_spectrum_needs_two_points():
    """Test a single point has no spectrum."""
    with pytest.raises(UsageError):
        spectrum(PointCloud.from_rows([[1.0, 2.0]]))
    with pytest.raises(UsageError):
        spectrum(chain_cloud(3), threshold=1.5)


def test_initial_s_curve_is_three_dimensional():
    """Test the S-curve needs all three axes to explain 99% of its variance."""
    assert spectrum(gen_s_curve()).dimension == 3


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1), shift=st.floats(min_value=-100.0, max_value=100.0))
def test_spectrum_invariant_under_rigid_motion(seed, shift):
    """Test translation and rotation leave the singular values unchanged."""
    cloud = random_cloud(seed, 15, 3)
    rotation, _ = np.linalg.qr(np.random.default_rng(seed + 1).normal(size=(3, 3)))
    moved = PointCloud(cloud.points @ rotation.T + shift)

    np.testing.assert_allclose(spectrum(moved).singular_values, spectrum(cloud).singular_values, rtol=0, atol=1e-9)


def test_flatness_of_line_is_zero():
    """Test a straight line is perfectly 1-flat."""
    assert flatness_ratio(chain_cloud(10), 1) == pytest.approx(0.0, abs=1e-12)


def test_flatness_of_half_circle():
    """Test the sampled half circle's flatness against a covariance eigenvalue oracle."""
    cloud = gen_half_circle(radius=1.0)
    ratio = flatness_ratio(cloud, 1)

    centered = cloud.points - cloud.points.mean(axis=0)
    eigenvalues = np.linalg.eigvalsh(centered.T @ centered)
    assert ratio == pytest.approx(np.sqrt(eigenvalues[0] / eigenvalues[1]), abs=1e-9)
    assert 0.43 < ratio < 0.445


def test_flatness_scale_invariant():
    """Test the ratio does not depend on the circle's radius."""
    assert flatness_ratio(gen_half_circle(radius=69.0), 1) == pytest.approx(
        flatness_ratio(gen_half_circle(radius=1.0), 1), rel=1e-9
    )


@pytest.mark.parametrize("d", [0, 2, 3])
def test_flatness_dimension_range(d):
    """Test d must satisfy 1 <= d < n."""
    with pytest.raises(UsageError):
        flatness_ratio(chain_cloud(4), d)


def test_flatness_monotone_in_dimension():
    """Test flatness is in [0, 1] and non-increasing in d."""
    cloud = random_cloud(4, 30, 5)
    ratios = [flatness_ratio(cloud, d) for d in range(1, 5)]

    assert all(0.0 <= ratio <= 1.0 for ratio in ratios)
    assert all(later <= earlier for earlier, later in zip(ratios, ratios[1:]))


def test_potential_at_rest_is_repulsive_sum(half_circle, params):
    """Test the elastic part of the potential vanishes at t = 0."""
    graph = build_neighbor_graph(half_circle, 3.36)
    distances = pairwise_distances(half_circle)
    non_neighbors = np.triu(~graph.adjacency, k=1)

    expected = params.k2 * distances[non_neighbors].sum()
    assert flattening_potential(ManifoldState.at_rest(half_circle), graph, params) == pytest.approx(expected, rel=1e-12)


def test_potential_gradient_is_the_field():
    """Test central differences of the potential reproduce the field."""
    rng = np.random.default_rng(21)
    initial = PointCloud(rng.uniform(-3.0, 3.0, size=(8, 2)))
    current = initial.moved_to(initial.points + rng.normal(0.0, 0.2, size=(8, 2)))
    graph = build_neighbor_graph(initial, 2.5)
    params = FieldParams(k1=0.1, k2=0.01)
    field = compute_field(ManifoldState(initial=initial, current=current), graph, params).vectors

    step = 1e-6
    gradient = np.zeros_like(field)
    for i in range(8):
        for axis in range(2):
            offset = np.zeros((8, 2))
            offset[i, axis] = step
            plus = ManifoldState(initial=initial, current=current.moved_to(current.points + offset))
            minus = ManifoldState(initial=initial, current=current.moved_to(current.points - offset))
            gradient[i, axis] = (
                flattening_potential(plus, graph, params) - flattening_potential(minus, graph, params)
            ) / (2 * step)

    np.testing.assert_allclose(gradient, field, rtol=0, atol=1e-7)


def test_max_extent_of_half_circle(half_circle):
    """Test the extent of the half circle is its diameter."""
    assert max_extent(half_circle) == pytest.approx(138.0, abs=1e-9)
    assert max_extent(PointCloud.from_rows([[1.0, 1.0]])) == 0.0


def test_snapshot_metrics_fields(half_circle, params):
    """Test the per-snapshot report carries every measurement."""
    graph = build_neighbor_graph(half_circle, 3.36)
    report = snapshot_metrics(ManifoldState.at_rest(half_circle), graph, params)

    assert report["step"] == 0
    assert report["topology"]["max_distortion"] == 0.0
    assert report["spectrum"]["dimension"] == 2
    assert set(report["flatness"]) == {"1"}
    assert report["max_field"] > 0
    assert report["max_extent"] == pytest.approx(138.0, abs=1e-9)
