"""The autonomous flattening field and its explicit time integration."""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field
from enum import StrEnum
import logging
import math

import numpy as np

from .const import (
    DEFAULT_CONVERGE_VEL,
    DEFAULT_CONVERGE_WINDOW,
    DEFAULT_DT,
    DEFAULT_EPSILON_DIST,
    DEFAULT_K1,
    DEFAULT_K2,
    DEFAULT_MAX_DISP_FRAC,
    DEFAULT_MAX_STEPS,
    DEFAULT_SNAPSHOT_EVERY,
    TERMINATION_BUDGET,
    TERMINATION_CONVERGED,
    TERMINATION_INSTABILITY,
)
from .exceptions import InstabilityError, UsageError
from .geometry import NeighborGraph, PointCloud, build_neighbor_graph, pairwise_distances

_LOGGER = logging.getLogger(__name__)

PROGRESS_LOG_EVERY = 1000


def _positive(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise UsageError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class FieldParams:
    """Coefficients of the elastic (K1) and repulsive (K2) interactions."""

    k1: float = DEFAULT_K1
    k2: float = DEFAULT_K2
    epsilon_dist: float = DEFAULT_EPSILON_DIST

    def __post_init__(self) -> None:
        _positive("K1", self.k1)
        _positive("K2", self.k2)
        _positive("epsilon_dist", self.epsilon_dist)


@dataclass(frozen=True)
class IntegratorConfig:
    """Explicit Euler settings, stopping rule and snapshot cadence."""

    dt: float = DEFAULT_DT
    max_steps: int = DEFAULT_MAX_STEPS
    converge_vel: float = DEFAULT_CONVERGE_VEL
    converge_window: int = DEFAULT_CONVERGE_WINDOW
    max_disp_frac: float = DEFAULT_MAX_DISP_FRAC
    snapshot_every: int = DEFAULT_SNAPSHOT_EVERY

    def __post_init__(self) -> None:
        _positive("dt", self.dt)
        if self.max_steps < 1:
            raise UsageError(f"max_steps must be >= 1, got {self.max_steps}")
        if not self.converge_vel >= 0:
            raise UsageError(f"converge_vel must be >= 0, got {self.converge_vel}")
        if self.converge_window < 1:
            raise UsageError(f"converge_window must be >= 1, got {self.converge_window}")
        if not 0 < self.max_disp_frac <= 1:
            raise UsageError(f"max_disp_frac must be in (0, 1], got {self.max_disp_frac}")
        if self.snapshot_every < 1:
            raise UsageError(f"snapshot_every must be >= 1, got {self.snapshot_every}")


@dataclass(frozen=True, eq=False)
class ManifoldState:
    """M(0), M(t) and the run counters at simulated time t."""

    initial: PointCloud
    current: PointCloud
    time: float = 0.0
    step_index: int = 0
    capped_steps: int = 0
    degeneracy_events: int = 0

    def __post_init__(self) -> None:
        if self.initial.points.shape != self.current.points.shape:
            raise UsageError(
                f"Initial and current clouds differ in shape: {self.initial.points.shape} vs {self.current.points.shape}"
            )
        if self.time < 0 or self.step_index < 0:
            raise UsageError("Simulated time and step index must be non-negative")

    @classmethod
    def at_rest(cls, cloud: PointCloud) -> ManifoldState:
        """The state at t = 0, where M(t) = M(0)."""
        return cls(initial=cloud, current=cloud)


@dataclass(frozen=True, eq=False)
class DeformingField:
    """One velocity vector per point, with its elastic and repulsive parts."""

    vectors: np.ndarray
    elastic: np.ndarray
    repulsive: np.ndarray
    degenerate_pairs: tuple[tuple[int, int], ...] = ()

    @property
    def magnitudes(self) -> np.ndarray:
        """Euclidean norm of each deforming vector."""
        return np.linalg.norm(self.vectors, axis=1)

    @property
    def max_magnitude(self) -> float:
        """Largest deforming-vector norm."""
        return float(self.magnitudes.max()) if len(self.vectors) else 0.0


class Termination(StrEnum):
    """Why a run stopped."""

    CONVERGED = TERMINATION_CONVERGED
    STEP_BUDGET_EXHAUSTED = TERMINATION_BUDGET
    INSTABILITY = TERMINATION_INSTABILITY


@dataclass(frozen=True, eq=False)
class Snapshot:
    """A recorded M(t)."""

    step_index: int
    time: float
    cloud: PointCloud


@dataclass(eq=False)
class Trajectory:
    """Recorded snapshots of a run and how it ended."""

    snapshots: list[Snapshot]
    termination: Termination
    final_state: ManifoldState
    graph: NeighborGraph
    instability_step: int | None = None
    message: str = ""

    @property
    def steps(self) -> int:
        """Number of Euler steps taken."""
        return self.final_state.step_index


@dataclass(frozen=True)
class DerivativeCheck:
    """Result of comparing a finite-difference velocity with the field."""

    residual: float
    capped: bool
    scale: float = 1.0


@dataclass(frozen=True, eq=False)
class _PairWeights:
    elastic: np.ndarray
    repulsive: np.ndarray
    degenerate: tuple[tuple[int, int], ...] = field(default=())


def _check_graph(state: ManifoldState, graph: NeighborGraph) -> None:
    if graph.num_points != state.current.num_points:
        raise UsageError(
            f"Neighbor graph has {graph.num_points} points but the state has {state.current.num_points}"
        )


def _check_index(i: int, state: ManifoldState) -> None:
    if not 0 <= i < state.current.num_points:
        raise UsageError(f"Point index {i} out of range for {state.current.num_points} points")


def _pair_weights(distances: np.ndarray, graph: NeighborGraph, params: FieldParams) -> _PairWeights:
    """
    Scalar weight w_ij per ordered pair so that a term equals sum_j w_ij (p_i - p_j).

    Elastic: K1 (d_ij(0) - d_ij) / d_ij over neighbors. Repulsive: K2 / d_ij over
    every other point. Pairs closer than epsilon_dist get zero weight.
    """
    valid = distances >= params.epsilon_dist
    np.fill_diagonal(valid, False)
    inverse = np.divide(1.0, distances, out=np.zeros_like(distances), where=valid)

    elastic = np.where(graph.adjacency, params.k1 * (graph.rest_lengths - distances) * inverse, 0.0)
    repulsive = np.where(graph.adjacency, 0.0, params.k2 * inverse)

    degenerate: tuple[tuple[int, int], ...] = ()
    if np.count_nonzero(valid) < valid.size - len(valid):
        rows, cols = np.nonzero(np.triu(~valid, k=1))
        degenerate = tuple((int(i), int(j)) for i, j in zip(rows, cols))
    return _PairWeights(elastic=elastic, repulsive=repulsive, degenerate=degenerate)


def _apply_weights(weights: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Sum_j w_ij (p_i - p_j) for every i, accumulated per axis in index order."""
    result = np.empty_like(points)
    for axis in range(points.shape[1]):
        delta = points[:, axis, np.newaxis] - points[np.newaxis, :, axis]
        result[:, axis] = np.sum(weights * delta, axis=1)
    return result


def degenerate_partners(i: int, state: ManifoldState, params: FieldParams) -> tuple[int, ...]:
    """
    Indices j != i whose current distance to point i is below epsilon_dist.

    elastic_term and repulsive_term give these pairs zero weight; compute_field
    reports the same pairs, as (min, max) tuples, in DeformingField.degenerate_pairs.
    """
    _check_index(i, state)
    row = pairwise_distances(state.current)[i]
    close = row < params.epsilon_dist
    close[i] = False
    return tuple(int(j) for j in np.flatnonzero(close))


def _row_term(
    i: int,
    state: ManifoldState,
    graph: NeighborGraph,
    params: FieldParams,
    neighbors: bool,
) -> np.ndarray:
    _check_graph(state, graph)
    _check_index(i, state)

    points = state.current.points
    row = pairwise_distances(state.current)[i]
    valid = row >= params.epsilon_dist
    valid[i] = False
    related = graph.adjacency[i] if neighbors else ~graph.adjacency[i]
    related = related.copy()
    related[i] = False

    mask = related & valid
    diff = points[i] - points[mask]
    d = row[mask]
    if neighbors:
        coeff = params.k1 * (graph.rest_lengths[i, mask] - d) / d
    else:
        coeff = params.k2 / d
    return np.sum(coeff[:, np.newaxis] * diff, axis=0)


def elastic_term(i: int, state: ManifoldState, graph: NeighborGraph, params: FieldParams) -> np.ndarray:
    """
    Elastic pull of point i toward the initial distances of its neighbors.

    Sum over j in U_i of K1 * unit(p_i - p_j) * (|p_i(0) - p_j(0)| - |p_i - p_j|),
    one unit weight per sample point. Neighbors closer than epsilon_dist contribute
    zero; degenerate_partners lists them.

    Args:
        i: Point index
        state: Current manifold state
        graph: Neighbor graph built on state.initial
        params: Field coefficients

    Returns:
        The elastic vector on point i (zero for an empty neighborhood)
    """
    return _row_term(i, state, graph, params, neighbors=True)


def repulsive_term(i: int, state: ManifoldState, graph: NeighborGraph, params: FieldParams) -> np.ndarray:
    """
    Constant-magnitude push of point i away from every non-neighbor.

    Sum over w not in U_i, w != i, of K2 * unit(p_i - p_w). Each pair contributes
    exactly K2 in magnitude whatever its separation, except pairs closer than
    epsilon_dist, which contribute zero (see degenerate_partners).
    """
    return _row_term(i, state, graph, params, neighbors=False)


def compute_field(state: ManifoldState, graph: NeighborGraph, params: FieldParams) -> DeformingField:
    """
    Evaluate the flattening field on the current shape.

    The result depends only on the current positions, the frozen graph and the
    coefficients, never on time or step count.

    Args:
        state: Current manifold state
        graph: Neighbor graph built on state.initial
        params: Field coefficients

    Returns:
        The deforming field with its elastic and repulsive components
    """
    _check_graph(state, graph)

    points = state.current.points
    distances = pairwise_distances(state.current)
    weights = _pair_weights(distances, graph, params)

    elastic = _apply_weights(weights.elastic, points)
    repulsive = _apply_weights(weights.repulsive, points)
    vectors = elastic + repulsive

    finite = np.all(np.isfinite(vectors), axis=1)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise InstabilityError(f"Non-finite deforming vector at point {bad}", point_index=bad, step_index=state.step_index)

    if weights.degenerate:
        _LOGGER.debug(
            "Step %d: %d degenerate pair(s) below %.3g (first: %s)",
            state.step_index,
            len(weights.degenerate),
            params.epsilon_dist,
            weights.degenerate[0],
        )

    return DeformingField(vectors=vectors, elastic=elastic, repulsive=repulsive, degenerate_pairs=weights.degenerate)


def _displacement(field: DeformingField, config: IntegratorConfig, radius: float) -> tuple[np.ndarray, float]:
    """Euler displacement and the uniform rescale factor applied by the cap."""
    displacement = config.dt * field.vectors
    norms = np.linalg.norm(displacement, axis=1)
    largest = float(norms.max()) if norms.size else 0.0
    limit = config.max_disp_frac * radius
    if largest > limit:
        scale = limit / largest
        return displacement * scale, scale
    return displacement, 1.0


def step(state: ManifoldState, field: DeformingField, config: IntegratorConfig, radius: float) -> ManifoldState:
    """
    Advance M(t) to M(t + dt) by moving each point along its deforming vector.

    If any point would move farther than max_disp_frac * radius, every displacement
    is scaled by the same factor so the largest equals that limit.

    Args:
        state: Current manifold state
        field: Field computed on state
        config: Integrator settings
        radius: Neighborhood radius r

    Returns:
        The advanced state
    """
    if field.vectors.shape != state.current.points.shape:
        raise UsageError(f"Field shape {field.vectors.shape} does not match cloud {state.current.points.shape}")

    displacement, scale = _displacement(field, config, radius)
    capped = scale < 1.0
    if capped:
        _LOGGER.debug("Step %d capped: displacement rescaled by %.6g", state.step_index, scale)

    new_points = state.current.points + displacement
    finite = np.all(np.isfinite(new_points), axis=1)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise InstabilityError(
            f"Non-finite coordinates for point {bad} after step {state.step_index + 1}",
            point_index=bad,
            step_index=state.step_index + 1,
        )

    return ManifoldState(
        initial=state.initial,
        current=state.current.moved_to(new_points),
        time=state.time + config.dt,
        step_index=state.step_index + 1,
        capped_steps=state.capped_steps + int(capped),
        degeneracy_events=state.degeneracy_events + int(bool(field.degenerate_pairs)),
    )


def run_simulation(
    initial: PointCloud,
    r: float,
    params: FieldParams,
    config: IntegratorConfig,
    on_snapshot: Callable[[Snapshot], None] | None = None,
) -> Trajectory:
    """
    Integrate the flattening field from M(0) until convergence or the step budget.

    The neighbor graph is built once from `initial`. A run converges when the
    largest deforming vector stays below converge_vel for converge_window
    consecutive evaluations. Snapshots are taken at t = 0, every snapshot_every
    steps, and at the final state.

    Args:
        initial: The initial manifold M(0)
        r: Neighborhood radius
        params: Field coefficients
        config: Integrator settings
        on_snapshot: Called with each snapshot as soon as it is recorded

    Returns:
        The trajectory; instability is reported as a termination reason, not raised
    """
    graph = build_neighbor_graph(initial, r)
    state = ManifoldState.at_rest(initial)
    snapshots: list[Snapshot] = []

    def record(current: ManifoldState) -> None:
        snapshot = Snapshot(step_index=current.step_index, time=current.time, cloud=current.current)
        snapshots.append(snapshot)
        if on_snapshot is not None:
            on_snapshot(snapshot)

    _LOGGER.info(
        "Starting run: N=%d n=%d r=%.6g K1=%.6g K2=%.6g dt=%.6g max_steps=%d",
        initial.num_points,
        initial.dim,
        graph.radius,
        params.k1,
        params.k2,
        config.dt,
        config.max_steps,
    )
    record(state)

    calm = 0
    termination = Termination.STEP_BUDGET_EXHAUSTED
    instability_step: int | None = None
    message = ""

    while True:
        try:
            deforming = compute_field(state, graph, params)
        except InstabilityError as err:
            termination = Termination.INSTABILITY
            instability_step = state.step_index
            message = str(err)
            break

        calm = calm + 1 if deforming.max_magnitude < config.converge_vel else 0
        if calm >= config.converge_window:
            termination = Termination.CONVERGED
            break
        if state.step_index >= config.max_steps:
            break

        try:
            state = step(state, deforming, config, graph.radius)
        except InstabilityError as err:
            termination = Termination.INSTABILITY
            instability_step = err.step_index
            message = str(err)
            break

        if state.step_index % config.snapshot_every == 0:
            record(state)
        if state.step_index % PROGRESS_LOG_EVERY == 0:
            _LOGGER.debug("Step %d t=%.6g max|v|=%.3e", state.step_index, state.time, deforming.max_magnitude)

    if snapshots[-1].step_index != state.step_index:
        record(state)

    if termination is Termination.INSTABILITY:
        _LOGGER.warning("Run became unstable at step %s: %s", instability_step, message)
    _LOGGER.info(
        "Run finished: %s after %d steps (t=%.6g, capped steps %d, degeneracy events %d)",
        termination.value,
        state.step_index,
        state.time,
        state.capped_steps,
        state.degeneracy_events,
    )

    return Trajectory(
        snapshots=snapshots,
        termination=termination,
        final_state=state,
        graph=graph,
        instability_step=instability_step,
        message=message,
    )


def deformation_derivative_check(
    state: ManifoldState,
    graph: NeighborGraph,
    params: FieldParams,
    config: IntegratorConfig,
) -> DerivativeCheck:
    """
    Compare (p(t + dt) - p(t)) / dt with the field that produced the step.

    For an uncapped Euler step the residual is rounding noise. When the
    displacement cap is active the residual is (1 - scale) * max|v| and the
    check is reported as capped.

    Args:
        state: State to step from
        graph: Neighbor graph built on state.initial
        params: Field coefficients
        config: Integrator settings

    Returns:
        Maximum per-point residual, whether the cap was active, and the rescale factor
    """
    deforming = compute_field(state, graph, params)
    _, scale = _displacement(deforming, config, graph.radius)
    advanced = step(state, deforming, config, graph.radius)

    velocity = (advanced.current.points - state.current.points) / config.dt
    residuals = np.linalg.norm(velocity - deforming.vectors, axis=1)
    residual = float(residuals.max()) if residuals.size else 0.0

    capped = scale < 1.0
    if capped:
        _LOGGER.info("Derivative check skipped: displacement cap active (scale %.6g)", scale)
    return DerivativeCheck(residual=residual, capped=capped, scale=scale)
