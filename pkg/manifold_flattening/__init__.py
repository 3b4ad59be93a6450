"""Flatten discretized manifolds by elastic and repulsive point interactions."""
from __future__ import annotations

from .const import VERSION
from .dynamics import (
    DeformingField,
    DerivativeCheck,
    FieldParams,
    IntegratorConfig,
    ManifoldState,
    Snapshot,
    Termination,
    Trajectory,
    compute_field,
    deformation_derivative_check,
    degenerate_partners,
    elastic_term,
    repulsive_term,
    run_simulation,
    step,
)
from .exceptions import IngestionError, InstabilityError, ManifestError, ManifoldFlatteningError, UsageError
from .generators import ManifoldSpec, build_cloud, gen_half_circle, gen_s_curve, gen_spiral, load_csv, save_csv
from .geometry import NeighborGraph, PointCloud, build_neighbor_graph, euclidean_distance, suggest_radius
from .metrics import (
    SpectrumReport,
    TopologyReport,
    adhesion_check,
    flatness_ratio,
    flattening_potential,
    neighbor_distortion,
    spectrum,
    topology_report,
)

__version__ = VERSION

__all__ = [
    "DeformingField",
    "DerivativeCheck",
    "FieldParams",
    "IngestionError",
    "InstabilityError",
    "IntegratorConfig",
    "ManifestError",
    "ManifoldFlatteningError",
    "ManifoldSpec",
    "ManifoldState",
    "NeighborGraph",
    "PointCloud",
    "Snapshot",
    "SpectrumReport",
    "Termination",
    "TopologyReport",
    "Trajectory",
    "UsageError",
    "adhesion_check",
    "build_cloud",
    "build_neighbor_graph",
    "compute_field",
    "deformation_derivative_check",
    "degenerate_partners",
    "elastic_term",
    "euclidean_distance",
    "flatness_ratio",
    "flattening_potential",
    "gen_half_circle",
    "gen_s_curve",
    "gen_spiral",
    "load_csv",
    "neighbor_distortion",
    "repulsive_term",
    "run_simulation",
    "save_csv",
    "spectrum",
    "step",
    "suggest_radius",
    "topology_report",
]
