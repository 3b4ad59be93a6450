"""Fixtures for manifold flattening tests."""
from __future__ import annotations

from collections.abc import Callable
import math

import numpy as np
import pytest

from manifold_flattening.dynamics import FieldParams
from manifold_flattening.generators import gen_half_circle, save_csv
from manifold_flattening.geometry import NeighborGraph, PointCloud


def chain_cloud(count: int, spacing: float = 1.0) -> PointCloud:
    """Collinear points along the x axis in R^2."""
    return PointCloud(np.column_stack((np.arange(count) * spacing, np.zeros(count))))


def random_cloud(seed: int, num_points: int, dim: int, spread: float = 5.0) -> PointCloud:
    """Uniform random cloud in [-spread, spread]^dim."""
    rng = np.random.default_rng(seed)
    return PointCloud(rng.uniform(-spread, spread, size=(num_points, dim)))


def reference_field(points: np.ndarray, graph: NeighborGraph, params: FieldParams) -> np.ndarray:
    """Naive double loop over ordered pairs, one term at a time."""
    num_points, dim = points.shape
    field = np.zeros((num_points, dim))
    for i in range(num_points):
        for j in range(num_points):
            if i == j:
                continue
            diff = points[i] - points[j]
            distance = math.sqrt(float(np.dot(diff, diff)))
            if distance < params.epsilon_dist:
                continue
            unit = diff / distance
            if graph.adjacency[i, j]:
                field[i] += params.k1 * unit * (graph.rest_lengths[i, j] - distance)
            else:
                field[i] += params.k2 * unit
    return field


@pytest.fixture
def half_circle() -> PointCloud:
    """The 129-point half circle of radius 69."""
    return gen_half_circle()


@pytest.fixture
def params() -> FieldParams:
    """Reference coefficients K1 = 0.1, K2 = 0.0002."""
    return FieldParams()


@pytest.fixture
def two_point_csv(tmp_path) -> str:
    """Two points one unit apart, written as CSV."""
    path = tmp_path / "pair.csv"
    save_csv(PointCloud.from_rows([[0.0, 0.0], [1.0, 0.0]]), path)
    return str(path)


@pytest.fixture
def field_oracle() -> Callable[[np.ndarray, NeighborGraph, FieldParams], np.ndarray]:
    """The naive reference field."""
    return reference_field
