"""SVG scatter plots of point clouds and their deforming fields."""
from __future__ import annotations

import logging
import math
from xml.sax.saxutils import escape

import numpy as np

from .const import (
    ARROW_CANVAS_FRACTION,
    DEFAULT_AZIMUTH_DEGREES,
    DEFAULT_CANVAS_HEIGHT,
    DEFAULT_CANVAS_WIDTH,
    DEFAULT_ELEVATION_DEGREES,
    DEFAULT_TOP_AXIS,
)
from .exceptions import UsageError
from .geometry import NeighborGraph, PointCloud

_LOGGER = logging.getLogger(__name__)

VIEW_PLANE = "plane"
VIEW_PERSPECTIVE = "perspective"
VIEW_TOP = "top"

AXIS_NAMES = ("x", "y", "z")
PADDING = 50
CAMERA_DISTANCE_FACTOR = 3.0

_STYLE = [
    "    <style>",
    "      .chart-bg { fill: #1a1a1a; }",
    "      .axis-line { stroke: #666; stroke-width: 1; }",
    "      .edge { stroke: #444; stroke-width: 1; }",
    "      .point { fill: #4A90E2; stroke: #fff; stroke-width: 0.5; }",
    "      .arrow { stroke: #E24A4A; stroke-width: 1.2; }",
    "      .text { fill: #ccc; font-family: Arial, sans-serif; font-size: 12px; }",
    "      .title { fill: #fff; font-family: Arial, sans-serif; font-size: 16px; font-weight: bold; }",
    "    </style>",
    '    <marker id="arrow-head" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="5" markerHeight="5" orient="auto">',
    '      <path d="M 0 0 L 10 5 L 0 10 z" fill="#E24A4A"/>',
    "    </marker>",
]


def _as_3d(points: np.ndarray) -> np.ndarray:
    """Pad to three columns, or keep the first three with a warning."""
    dim = points.shape[1]
    if dim > 3:
        _LOGGER.warning("Cloud has %d dimensions; plotting the projection on the first 3 axes", dim)
        return points[:, :3]
    if dim < 3:
        return np.hstack((points, np.zeros((points.shape[0], 3 - dim))))
    return points


def project_perspective(
    points: np.ndarray,
    azimuth: float = DEFAULT_AZIMUTH_DEGREES,
    elevation: float = DEFAULT_ELEVATION_DEGREES,
    center: np.ndarray | None = None,
    extent: float | None = None,
) -> np.ndarray:
    """
    Perspective projection of 3-D points seen from an azimuth/elevation camera.

    Args:
        points: (N, 3) coordinates
        azimuth: Rotation about the z axis in degrees
        elevation: Camera tilt above the xy plane in degrees
        center: Point the camera looks at (defaults to the centroid)
        extent: Scene size used to place the camera (defaults to the cloud's)

    Returns:
        (N, 2) screen coordinates, y pointing up
    """
    if center is None:
        center = points.mean(axis=0)
    shifted = points - center
    if extent is None:
        extent = float(np.max(np.linalg.norm(shifted, axis=1))) if len(points) else 0.0
    extent = extent or 1.0

    az = math.radians(azimuth)
    el = math.radians(elevation)
    x1 = shifted[:, 0] * math.cos(az) - shifted[:, 1] * math.sin(az)
    y1 = shifted[:, 0] * math.sin(az) + shifted[:, 1] * math.cos(az)
    z1 = shifted[:, 2]

    vertical = z1 * math.cos(el) - y1 * math.sin(el)
    depth = y1 * math.cos(el) + z1 * math.sin(el)
    distance = CAMERA_DISTANCE_FACTOR * extent
    factor = distance / (distance + depth)
    return np.column_stack((x1 * factor, vertical * factor))


def project_top(points: np.ndarray, drop_axis: int = DEFAULT_TOP_AXIS) -> np.ndarray:
    """Orthographic view along one coordinate axis."""
    if not 0 <= drop_axis < points.shape[1]:
        raise UsageError(f"Top-view axis {drop_axis} out of range for {points.shape[1]}-D points")
    keep = [axis for axis in range(points.shape[1]) if axis != drop_axis]
    return points[:, keep[:2]]


def _arrow_tips(points: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Arrow ends scaled so the longest arrow spans a fixed share of the cloud."""
    lengths = np.linalg.norm(vectors, axis=1)
    longest = float(lengths.max()) if lengths.size else 0.0
    span = float(np.max(np.ptp(points, axis=0))) if len(points) else 0.0
    if longest == 0.0 or span == 0.0:
        return points.copy()
    return points + vectors * (ARROW_CANVAS_FRACTION * span / longest)


def _generate_empty_chart(width: int, height: int, message: str) -> str:
    """Generate an empty chart with a message."""
    return f"""<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" width="{width}" height="{height}">
  <rect width="{width}" height="{height}" fill="#1a1a1a"/>
  <text x="{width/2}" y="{height/2}" text-anchor="middle" fill="#ccc" font-family="Arial, sans-serif" font-size="14px">{escape(message)}</text>
</svg>"""


def render_svg(
    screen: np.ndarray,
    title: str,
    tips: np.ndarray | None = None,
    edges: list[tuple[int, int]] | None = None,
    axis_labels: tuple[str, str] = ("x", "y"),
    width: int = DEFAULT_CANVAS_WIDTH,
    height: int = DEFAULT_CANVAS_HEIGHT,
) -> str:
    """
    Draw projected points, optional edges and optional arrows on a dark canvas.

    The scene is scaled uniformly and centered, so shapes keep their aspect ratio.

    Args:
        screen: (N, 2) projected point positions
        title: Chart title
        tips: (N, 2) projected arrow ends, one per point
        edges: Index pairs to connect
        axis_labels: Names of the horizontal and vertical screen axes
        width: Canvas width in pixels
        height: Canvas height in pixels

    Returns:
        SVG markup as a string
    """
    if len(screen) == 0:
        return _generate_empty_chart(width, height, "No points to plot")

    extent_points = screen if tips is None else np.vstack((screen, tips))
    low = extent_points.min(axis=0)
    high = extent_points.max(axis=0)
    span = high - low
    usable_w = width - 2 * PADDING
    usable_h = height - 2 * PADDING
    scale = min(
        usable_w / span[0] if span[0] > 0 else math.inf,
        usable_h / span[1] if span[1] > 0 else math.inf,
    )
    if not math.isfinite(scale):
        scale = 1.0
    middle = (low + high) / 2

    def to_canvas(xy: np.ndarray) -> tuple[float, float]:
        # Invert y because SVG y-axis goes down
        return width / 2 + (xy[0] - middle[0]) * scale, height / 2 - (xy[1] - middle[1]) * scale

    svg_parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" width="{width}" height="{height}">',
        "  <defs>",
        *_STYLE,
        "  </defs>",
        "",
        f'  <rect width="{width}" height="{height}" class="chart-bg"/>',
        "",
        f'  <text x="{width/2}" y="30" text-anchor="middle" class="title">{escape(title)}</text>',
        "",
        f'  <line x1="{PADDING}" y1="{height - PADDING / 2}" x2="{PADDING + 40}" y2="{height - PADDING / 2}" class="axis-line"/>',
        f'  <text x="{PADDING + 45}" y="{height - PADDING / 2 + 4}" class="text">{escape(axis_labels[0])}</text>',
        f'  <line x1="{PADDING}" y1="{height - PADDING / 2}" x2="{PADDING}" y2="{height - PADDING / 2 - 40}" class="axis-line"/>',
        f'  <text x="{PADDING - 4}" y="{height - PADDING / 2 - 45}" class="text">{escape(axis_labels[1])}</text>',
    ]

    canvas = [to_canvas(xy) for xy in screen]

    for i, j in edges or []:
        x1, y1 = canvas[i]
        x2, y2 = canvas[j]
        svg_parts.append(f'  <line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" class="edge"/>')

    for x, y in canvas:
        svg_parts.append(f'  <circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" class="point"/>')

    if tips is not None:
        for (x1, y1), tip in zip(canvas, tips):
            x2, y2 = to_canvas(tip)
            svg_parts.append(
                f'  <line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" class="arrow" marker-end="url(#arrow-head)"/>'
            )

    svg_parts.append("</svg>")
    return "\n".join(svg_parts)


def plot_cloud(
    cloud: PointCloud,
    title: str = "Manifold",
    vectors: np.ndarray | None = None,
    graph: NeighborGraph | None = None,
    width: int = DEFAULT_CANVAS_WIDTH,
    height: int = DEFAULT_CANVAS_HEIGHT,
    top_axis: int = DEFAULT_TOP_AXIS,
) -> dict[str, str]:
    """
    Render a cloud as one planar SVG, or a perspective and a top-view SVG for 3-D.

    Args:
        cloud: Points to draw
        title: Chart title prefix
        vectors: Deforming vectors to draw as arrows, one per point
        graph: Neighbor graph whose pairs are drawn as edges
        width: Canvas width in pixels
        height: Canvas height in pixels
        top_axis: Axis dropped by the top view (3-D only)

    Returns:
        Mapping of view name to SVG markup
    """
    if width <= 2 * PADDING or height <= 2 * PADDING:
        raise UsageError(f"Canvas {width}x{height} is too small")

    points = cloud.points
    if vectors is not None and np.shape(vectors) != points.shape:
        raise UsageError(f"Expected {points.shape} arrow vectors, got {np.shape(vectors)}")
    tips = _arrow_tips(points, np.asarray(vectors)) if vectors is not None else None
    edges = list(graph.pairs()) if graph is not None else None

    if cloud.dim <= 2:
        flat = points if cloud.dim == 2 else np.hstack((points, np.zeros((len(points), 1))))
        flat_tips = None
        if tips is not None:
            flat_tips = tips if cloud.dim == 2 else np.hstack((tips, np.zeros((len(tips), 1))))
        return {VIEW_PLANE: render_svg(flat, title, flat_tips, edges, ("x", "y"), width, height)}

    space = _as_3d(points)
    space_tips = _as_3d(tips) if tips is not None else None
    if not 0 <= top_axis < 3:
        raise UsageError(f"Top-view axis must be 0, 1 or 2, got {top_axis}")

    center = space.mean(axis=0)
    extent = float(np.max(np.linalg.norm(space - center, axis=1)))
    perspective = project_perspective(space, center=center, extent=extent)
    perspective_tips = (
        project_perspective(space_tips, center=center, extent=extent) if space_tips is not None else None
    )

    kept = tuple(AXIS_NAMES[axis] for axis in range(3) if axis != top_axis)
    top = project_top(space, top_axis)
    top_tips = project_top(space_tips, top_axis) if space_tips is not None else None

    return {
        VIEW_PERSPECTIVE: render_svg(perspective, f"{title} (3D)", perspective_tips, edges, ("", ""), width, height),
        VIEW_TOP: render_svg(top, f"{title} (top view)", top_tips, edges, (kept[0], kept[1]), width, height),
    }
