"""Initial manifolds: the three reference shapes and CSV point clouds."""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
import logging
import math
from pathlib import Path
from typing import Any

import numpy as np

from .const import (
    CSV_SIGNIFICANT_DIGITS,
    HALF_CIRCLE_COUNT,
    HALF_CIRCLE_RADIUS,
    KIND_CSV,
    KIND_HALF_CIRCLE,
    KIND_S_CURVE,
    KIND_SPIRAL,
    MANIFOLD_KINDS,
    S_CURVE_GRID_U,
    S_CURVE_GRID_V,
    S_CURVE_SCALE,
    SPIRAL_COUNT,
    SPIRAL_OFFSET,
    SPIRAL_T_END,
    SPIRAL_T_START,
)
from .exceptions import IngestionError, UsageError
from .geometry import PointCloud

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class ManifoldSpec:
    """Which initial manifold to build, with its kind-specific parameters."""

    kind: str
    radius: float = HALF_CIRCLE_RADIUS
    count: int | None = None
    t_start: float = SPIRAL_T_START
    t_end: float = SPIRAL_T_END
    offset: float = SPIRAL_OFFSET
    grid_u: int = S_CURVE_GRID_U
    grid_v: int = S_CURVE_GRID_V
    scale: float = S_CURVE_SCALE
    path: str | None = None

    def __post_init__(self) -> None:
        """Check the parameters the chosen kind actually uses."""
        if self.kind not in MANIFOLD_KINDS:
            raise UsageError(f"Unknown manifold kind {self.kind!r}; expected one of {', '.join(MANIFOLD_KINDS)}")

        if self.kind in (KIND_HALF_CIRCLE, KIND_SPIRAL) and self.resolved_count < 2:
            raise UsageError(f"Sample count must be >= 2, got {self.resolved_count}")
        if self.kind == KIND_HALF_CIRCLE and not self.radius > 0:
            raise UsageError(f"Half-circle radius must be positive, got {self.radius}")
        if self.kind == KIND_SPIRAL and not self.t_end > self.t_start:
            raise UsageError(f"Spiral parameter range [{self.t_start}, {self.t_end}] is degenerate")
        if self.kind == KIND_S_CURVE:
            if self.grid_u < 2 or self.grid_v < 2:
                raise UsageError(f"S-curve grid must be at least 2x2, got {self.grid_u}x{self.grid_v}")
            if not self.scale > 0:
                raise UsageError(f"S-curve scale must be positive, got {self.scale}")
            if self.count is not None and self.count != self.grid_u * self.grid_v:
                raise UsageError(
                    f"S-curve count {self.count} does not match grid {self.grid_u}x{self.grid_v}"
                )
        if self.kind == KIND_CSV and not self.path:
            raise UsageError("A csv manifold needs a file path")

    @property
    def resolved_count(self) -> int:
        """Sample count, falling back to the reference count for the kind."""
        if self.count is not None:
            return self.count
        if self.kind == KIND_SPIRAL:
            return SPIRAL_COUNT
        if self.kind == KIND_S_CURVE:
            return self.grid_u * self.grid_v
        return HALF_CIRCLE_COUNT

    def as_dict(self) -> dict[str, Any]:
        """Parameters relevant to the kind, JSON-ready."""
        data = asdict(self)
        keep = {
            KIND_HALF_CIRCLE: ("radius", "count"),
            KIND_SPIRAL: ("count", "t_start", "t_end", "offset"),
            KIND_S_CURVE: ("grid_u", "grid_v", "scale"),
            KIND_CSV: ("path",),
        }[self.kind]
        result: dict[str, Any] = {"kind": self.kind}
        for key in keep:
            result[key] = self.resolved_count if key == "count" else data[key]
        return result

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ManifoldSpec:
        """Inverse of as_dict; unknown keys are rejected."""
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"Unknown manifold parameters: {', '.join(sorted(unknown))}")
        return cls(**data)


def gen_half_circle(radius: float = HALF_CIRCLE_RADIUS, count: int = HALF_CIRCLE_COUNT) -> PointCloud:
    """
    Sample a half circle of the given radius at uniform angular spacing.

    Args:
        radius: Circle radius
        count: Number of samples, endpoints included

    Returns:
        Points (radius cos(k pi/(count-1)), radius sin(k pi/(count-1))), k = 0..count-1
    """
    if count < 2:
        raise UsageError(f"Sample count must be >= 2, got {count}")
    if not radius > 0:
        raise UsageError(f"Radius must be positive, got {radius}")

    theta = np.arange(count) * np.pi / (count - 1)
    return PointCloud(np.column_stack((radius * np.cos(theta), radius * np.sin(theta))))


def gen_spiral(
    count: int = SPIRAL_COUNT,
    t_start: float = SPIRAL_T_START,
    t_end: float = SPIRAL_T_END,
    offset: float = SPIRAL_OFFSET,
) -> PointCloud:
    """
    Sample the planar spiral ((t + offset) cos(pi t), (t + offset) sin(pi t)).

    Sampling is uniform in t, not in arc length.

    Args:
        count: Number of samples, endpoints included
        t_start: First parameter value
        t_end: Last parameter value
        offset: Radial offset added to t

    Returns:
        The sampled spiral in R^2
    """
    if count < 2:
        raise UsageError(f"Sample count must be >= 2, got {count}")
    if not t_end > t_start:
        raise UsageError(f"Parameter range [{t_start}, {t_end}] is degenerate")

    t = np.linspace(t_start, t_end, count)
    rho = t + offset
    return PointCloud(np.column_stack((rho * np.cos(np.pi * t), rho * np.sin(np.pi * t))))


def gen_s_curve(
    grid_u: int = S_CURVE_GRID_U,
    grid_v: int = S_CURVE_GRID_V,
    scale: float = S_CURVE_SCALE,
) -> PointCloud:
    """
    Sample the S-curve surface in R^3 on a regular (u, v) grid.

    u runs over [-3pi/2, 3pi/2] and v over [0, 2]; the point for (u, v) is
    scale * (sin u, v, sign(u)(cos u - 1)). Points are ordered u-major, so the
    row for u_i occupies indices i*grid_v .. i*grid_v + grid_v - 1.

    Args:
        grid_u: Samples along the S-shaped section
        grid_v: Samples along the straight direction
        scale: Uniform scale factor

    Returns:
        grid_u * grid_v points in R^3
    """
    if grid_u < 2 or grid_v < 2:
        raise UsageError(f"S-curve grid must be at least 2x2, got {grid_u}x{grid_v}")
    if not scale > 0:
        raise UsageError(f"Scale must be positive, got {scale}")

    u = np.linspace(-1.5 * np.pi, 1.5 * np.pi, grid_u)
    v = np.linspace(0.0, 2.0, grid_v)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    uu = uu.ravel()
    vv = vv.ravel()
    points = np.column_stack((np.sin(uu), vv, np.sign(uu) * (np.cos(uu) - 1.0)))
    return PointCloud(scale * points)


def _parse_cell(text: str) -> float | None:
    """Parse one CSV cell, returning None when it is not a number."""
    try:
        return float(text.strip())
    except ValueError:
        return None


def load_csv(path: str | Path) -> PointCloud:
    """
    Read a point cloud, one point per line.

    A first row containing any non-numeric cell is treated as a header and skipped.
    Blank lines are ignored.

    Args:
        path: UTF-8 comma-separated file

    Returns:
        Row k of the file becomes point k
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as handle:
            raw_rows = [(number, row) for number, row in enumerate(csv.reader(handle), start=1)]
    except FileNotFoundError as err:
        raise IngestionError(f"Point cloud file not found: {path}") from err
    except (OSError, UnicodeDecodeError, csv.Error) as err:
        raise IngestionError(f"Cannot read point cloud file {path}: {err}") from err

    rows = [(number, row) for number, row in raw_rows if any(cell.strip() for cell in row)]
    if not rows:
        raise IngestionError(f"Point cloud file {path} is empty", row=1)

    first_number, first_row = rows[0]
    if any(_parse_cell(cell) is None for cell in first_row):
        _LOGGER.debug("Skipping header row in %s: %s", path, first_row)
        rows = rows[1:]
        if not rows:
            raise IngestionError(f"Point cloud file {path} has a header but no data", row=first_number + 1)

    width = len(rows[0][1])
    points: list[list[float]] = []
    for number, row in rows:
        if len(row) != width:
            raise IngestionError(
                f"Ragged row in {path}: expected {width} columns, found {len(row)}",
                row=number,
                column=min(len(row), width) + 1,
            )
        values = []
        for column, cell in enumerate(row, start=1):
            value = _parse_cell(cell)
            if value is None:
                raise IngestionError(f"Non-numeric cell {cell!r} in {path}", row=number, column=column)
            if not math.isfinite(value):
                raise IngestionError(f"Non-finite cell {cell!r} in {path}", row=number, column=column)
            values.append(value)
        points.append(values)

    cloud = PointCloud(np.asarray(points, dtype=float))
    _LOGGER.debug("Loaded %d points in R^%d from %s", cloud.num_points, cloud.dim, path)
    return cloud


def csv_header(dim: int) -> list[str]:
    """Column names for a cloud of the given dimension."""
    if dim <= 3:
        return ["x", "y", "z"][:dim]
    return [f"x{i}" for i in range(dim)]


def save_csv(cloud: PointCloud, path: str | Path) -> Path:
    """Write a cloud with a header row and 17 significant digits per value."""
    path = Path(path)
    lines = [",".join(csv_header(cloud.dim))]
    for row in cloud.points:
        lines.append(",".join(format(float(value), f".{CSV_SIGNIFICANT_DIGITS}g") for value in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def build_cloud(spec: ManifoldSpec) -> PointCloud:
    """Construct the initial manifold described by a spec."""
    if spec.kind == KIND_HALF_CIRCLE:
        return gen_half_circle(spec.radius, spec.resolved_count)
    if spec.kind == KIND_SPIRAL:
        return gen_spiral(spec.resolved_count, spec.t_start, spec.t_end, spec.offset)
    if spec.kind == KIND_S_CURVE:
        return gen_s_curve(spec.grid_u, spec.grid_v, spec.scale)
    return load_csv(spec.path or "")
