"""Test the reference experiments and their acceptance checks."""
from __future__ import annotations

import json

import pytest

from manifold_flattening.const import EXIT_OK, KIND_HALF_CIRCLE, KIND_S_CURVE, KIND_SPIRAL
from manifold_flattening.dynamics import Termination
from manifold_flattening.exceptions import UsageError
from manifold_flattening.experiments import (
    EXPERIMENT_HALF_CIRCLE,
    EXPERIMENT_S_CURVE,
    EXPERIMENT_SPIRAL,
    AcceptanceCheck,
    acceptance_report,
    experiment_config,
    initial_field_checks,
    largest_extent_dip,
    run_experiment,
)
from manifold_flattening.generators import build_cloud
from manifold_flattening.geometry import build_neighbor_graph
from manifold_flattening.metrics import adhesion_check

from .conftest import chain_cloud


def test_experiment_presets(tmp_path):
    """Test each experiment uses its reference manifold, radius and integration horizon."""
    half_circle = experiment_config(EXPERIMENT_HALF_CIRCLE, tmp_path)
    assert half_circle.manifold.kind == KIND_HALF_CIRCLE
    assert half_circle.r == 3.36
    assert (half_circle.k1, half_circle.k2) == (0.1, 0.0002)
    assert (half_circle.dt, half_circle.max_steps) == (1.0, 60_000)
    assert half_circle.snapshot_every == 1000

    spiral = experiment_config(EXPERIMENT_SPIRAL, tmp_path)
    assert spiral.manifold.kind == KIND_SPIRAL
    assert spiral.r == 1.2
    assert (spiral.dt, spiral.max_steps) == (0.75, 80_000)

    s_curve = experiment_config(EXPERIMENT_S_CURVE, tmp_path, max_steps=7)
    assert s_curve.manifold.kind == KIND_S_CURVE
    assert s_curve.r is None
    assert s_curve.max_steps == 7
    assert s_curve.dt == 0.1


@pytest.mark.parametrize("name", [EXPERIMENT_HALF_CIRCLE, EXPERIMENT_SPIRAL])
def test_experiment_time_step_is_stable(name, tmp_path):
    """Test dt stays below the explicit Euler bound of the elastic coupling."""
    config = experiment_config(name, tmp_path)
    cloud = build_cloud(config.manifold)
    graph = build_neighbor_graph(cloud, config.r)

    # Largest eigenvalue of the elastic Jacobian is at most 2 * K1 * max degree
    assert config.dt * 2 * config.k1 * int(graph.degrees.max()) < 2


def test_unknown_experiment(tmp_path):
    """Test an unknown experiment name is a usage error."""
    with pytest.raises(UsageError):
        experiment_config("torus", tmp_path)


@pytest.mark.parametrize(
    ("extents", "expected"),
    [([1.0, 2.0, 1.9, 3.0], 0.05), ([1.0, 2.0, 3.0], 0.0), ([], 0.0), ([0.0, 0.0], 0.0)],
)
def test_largest_extent_dip(extents, expected):
    """Test the largest relative drop below the running maximum."""
    assert largest_extent_dip(extents) == pytest.approx(expected)


def test_initial_field_checks_on_half_circle(half_circle, params):
    """Test the endpoints are pushed apart with no elastic component at t = 0."""
    checks = initial_field_checks(half_circle, build_neighbor_graph(half_circle, 3.36), params)

    assert [check.name for check in checks] == ["initial_endpoint_outward_projection", "initial_elastic_max_abs"]
    assert all(check.passed for check in checks)
    assert checks[0].value > 0


def test_initial_field_checks_closed_curve(params):
    """Test coincident endpoints have no separation axis."""
    cloud = chain_cloud(3)
    closed = cloud.moved_to([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
    with pytest.raises(UsageError):
        initial_field_checks(closed, build_neighbor_graph(closed, 1.5), params)


def test_acceptance_report_nan_is_null():
    """Test a missing measurement is reported as null and fails the experiment."""
    checks = [AcceptanceCheck("a", 0.01, 0.05, True), AcceptanceCheck("b", float("nan"), 0.1, False)]
    report = acceptance_report("spiral", checks)

    assert report["passed"] is False
    assert report["checks"][1]["value"] is None
    json.dumps(report, allow_nan=False)


def test_short_half_circle_experiment(tmp_path):
    """Test a truncated experiment writes acceptance.json and fails only on convergence."""
    result, checks = run_experiment(EXPERIMENT_HALF_CIRCLE, tmp_path, max_steps=20)

    by_name = {check.name: check for check in checks}
    assert not by_name["converged"].passed
    assert by_name["initial_endpoint_outward_projection"].passed
    assert by_name["initial_elastic_max_abs"].passed
    assert by_name["final_min_distance"].passed

    report = json.loads((tmp_path / "acceptance.json").read_text(encoding="utf-8"))
    assert report["experiment"] == EXPERIMENT_HALF_CIRCLE
    assert report["passed"] is False
    assert result.exit_code == 0


def test_short_s_curve_experiment(tmp_path):
    """Test the S-curve starts three-dimensional."""
    _, checks = run_experiment(EXPERIMENT_S_CURVE, tmp_path, max_steps=5)

    by_name = {check.name: check for check in checks}
    assert by_name["initial_dimension"].passed
    assert by_name["final_dimension"].value == 3.0
    assert not by_name["final_dimension"].passed


def _checks_by_name(checks):
    return {check.name: check for check in checks}


@pytest.mark.slow
def test_half_circle_experiment_flattens(tmp_path):
    """Test the half circle unrolls into a straight line without adhesion."""
    result, checks = run_experiment(EXPERIMENT_HALF_CIRCLE, tmp_path)
    by_name = _checks_by_name(checks)

    assert result.exit_code == EXIT_OK
    assert by_name["initial_endpoint_outward_projection"].passed
    assert by_name["initial_elastic_max_abs"].passed
    assert by_name["final_flatness_d1"].passed
    assert by_name["final_flatness_d1"].value < 0.05
    assert by_name["final_min_distance"].passed
    assert not adhesion_check(result.trajectory.final_state).adhesion


@pytest.mark.slow
def test_spiral_experiment_flattens(tmp_path):
    """Test the spiral unwinds into a line while its extent keeps growing."""
    result, checks = run_experiment(EXPERIMENT_SPIRAL, tmp_path)
    by_name = _checks_by_name(checks)
    extents = [entry["max_extent"] for entry in result.manifest["metrics"]["snapshots"]]

    assert result.exit_code == EXIT_OK
    assert largest_extent_dip(extents) <= 0.01
    assert by_name["extent_largest_dip"].passed
    assert by_name["final_flatness_d1"].passed
    assert by_name["final_flatness_d1"].value < 0.10
    assert not adhesion_check(result.trajectory.final_state).adhesion


@pytest.mark.slow
def test_s_curve_experiment_flattens(tmp_path):
    """Test the S-curve converges to a flat two-dimensional sheet."""
    result, checks = run_experiment(EXPERIMENT_S_CURVE, tmp_path)
    by_name = _checks_by_name(checks)

    assert result.trajectory.termination is Termination.CONVERGED
    assert by_name["initial_dimension"].passed
    assert by_name["final_dimension"].passed
    assert by_name["final_flatness_d2"].passed
    assert by_name["final_rms_distortion"].passed
    assert not adhesion_check(result.trajectory.final_state).adhesion

    report = json.loads((tmp_path / "acceptance.json").read_text(encoding="utf-8"))
    assert report["passed"] is True
