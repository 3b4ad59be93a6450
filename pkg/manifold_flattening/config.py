"""Run configuration and its validation schemas."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
import json
import logging
import math
from pathlib import Path
import re
from typing import Any

import voluptuous as vol

from .const import (
    CONF_CONVERGE_VEL,
    CONF_CONVERGE_WINDOW,
    CONF_DIMENSION_THRESHOLD,
    CONF_DT,
    CONF_EPSILON_ADHESION,
    CONF_EPSILON_DIST,
    CONF_K1,
    CONF_K2,
    CONF_MANIFOLD,
    CONF_MAX_DISP_FRAC,
    CONF_MAX_STEPS,
    CONF_OUTPUT_DIR,
    CONF_PLOT,
    CONF_RADIUS,
    CONF_RADIUS_MULTIPLIER,
    CONF_RADIUS_PERCENTILE,
    CONF_SNAPSHOT_EVERY,
    DEFAULT_CANVAS_HEIGHT,
    DEFAULT_CANVAS_WIDTH,
    DEFAULT_CONVERGE_VEL,
    DEFAULT_CONVERGE_WINDOW,
    DEFAULT_DIMENSION_THRESHOLD,
    DEFAULT_DT,
    DEFAULT_EPSILON_ADHESION,
    DEFAULT_EPSILON_DIST,
    DEFAULT_K1,
    DEFAULT_K2,
    DEFAULT_MAX_DISP_FRAC,
    DEFAULT_MAX_STEPS,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_RADIUS_MULTIPLIER,
    DEFAULT_RADIUS_PERCENTILE,
    DEFAULT_SNAPSHOT_EVERY,
    DEFAULT_TOP_AXIS,
    MANIFEST_FILE,
    MANIFOLD_KINDS,
)
from .dynamics import FieldParams, IntegratorConfig
from .exceptions import ManifestError, UsageError
from .generators import ManifoldSpec

_LOGGER = logging.getLogger(__name__)


def parse_grid(grid_str: str) -> tuple[int, int]:
    """Parse an S-curve grid string such as "24x15" into (u, v) sample counts."""
    match = re.match(r"^\s*(\d+)\s*[xX*]\s*(\d+)\s*$", grid_str)
    if not match:
        raise UsageError(f"Grid must look like 24x15, got {grid_str!r}")
    grid_u, grid_v = (int(value) for value in match.groups())
    if grid_u < 2 or grid_v < 2:
        raise UsageError(f"Grid must be at least 2x2, got {grid_u}x{grid_v}")
    return grid_u, grid_v


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise vol.Invalid("must be finite")
    return value


FINITE_FLOAT = vol.All(vol.Coerce(float), _finite)
POSITIVE_FLOAT = vol.All(FINITE_FLOAT, vol.Range(min=0, min_included=False))
NON_NEGATIVE_FLOAT = vol.All(FINITE_FLOAT, vol.Range(min=0))
POSITIVE_INT = vol.All(vol.Coerce(int), vol.Range(min=1))

MANIFOLD_SCHEMA = vol.Schema({
    vol.Required("kind"): vol.In(MANIFOLD_KINDS),
    vol.Optional("radius"): POSITIVE_FLOAT,
    vol.Optional("count"): vol.Any(None, vol.All(vol.Coerce(int), vol.Range(min=2))),
    vol.Optional("t_start"): FINITE_FLOAT,
    vol.Optional("t_end"): FINITE_FLOAT,
    vol.Optional("offset"): FINITE_FLOAT,
    vol.Optional("grid_u"): vol.All(vol.Coerce(int), vol.Range(min=2)),
    vol.Optional("grid_v"): vol.All(vol.Coerce(int), vol.Range(min=2)),
    vol.Optional("scale"): POSITIVE_FLOAT,
    vol.Optional("path"): vol.Any(None, str),
})

PLOT_SCHEMA = vol.Schema({
    vol.Optional("width", default=DEFAULT_CANVAS_WIDTH): vol.All(vol.Coerce(int), vol.Range(min=200)),
    vol.Optional("height", default=DEFAULT_CANVAS_HEIGHT): vol.All(vol.Coerce(int), vol.Range(min=200)),
    vol.Optional("top_axis", default=DEFAULT_TOP_AXIS): vol.All(vol.Coerce(int), vol.Range(min=0, max=2)),
    vol.Optional("arrows", default=False): bool,
})

RUN_SCHEMA = vol.Schema({
    vol.Required(CONF_MANIFOLD): MANIFOLD_SCHEMA,
    vol.Optional(CONF_RADIUS, default=None): vol.Any(None, POSITIVE_FLOAT),
    vol.Optional(CONF_RADIUS_PERCENTILE, default=DEFAULT_RADIUS_PERCENTILE): vol.All(
        FINITE_FLOAT, vol.Range(min=0, max=100, min_included=False)
    ),
    vol.Optional(CONF_RADIUS_MULTIPLIER, default=DEFAULT_RADIUS_MULTIPLIER): POSITIVE_FLOAT,
    vol.Optional(CONF_K1, default=DEFAULT_K1): POSITIVE_FLOAT,
    vol.Optional(CONF_K2, default=DEFAULT_K2): POSITIVE_FLOAT,
    vol.Optional(CONF_EPSILON_DIST, default=DEFAULT_EPSILON_DIST): POSITIVE_FLOAT,
    vol.Optional(CONF_DT, default=DEFAULT_DT): POSITIVE_FLOAT,
    vol.Optional(CONF_MAX_STEPS, default=DEFAULT_MAX_STEPS): POSITIVE_INT,
    vol.Optional(CONF_CONVERGE_VEL, default=DEFAULT_CONVERGE_VEL): NON_NEGATIVE_FLOAT,
    vol.Optional(CONF_CONVERGE_WINDOW, default=DEFAULT_CONVERGE_WINDOW): POSITIVE_INT,
    vol.Optional(CONF_MAX_DISP_FRAC, default=DEFAULT_MAX_DISP_FRAC): vol.All(
        FINITE_FLOAT, vol.Range(min=0, max=1, min_included=False)
    ),
    vol.Optional(CONF_SNAPSHOT_EVERY, default=DEFAULT_SNAPSHOT_EVERY): POSITIVE_INT,
    vol.Optional(CONF_OUTPUT_DIR, default=DEFAULT_OUTPUT_DIR): vol.All(str, vol.Length(min=1)),
    vol.Optional(CONF_EPSILON_ADHESION, default=DEFAULT_EPSILON_ADHESION): NON_NEGATIVE_FLOAT,
    vol.Optional(CONF_DIMENSION_THRESHOLD, default=DEFAULT_DIMENSION_THRESHOLD): vol.All(
        FINITE_FLOAT, vol.Range(min=0, max=1, min_included=False)
    ),
    vol.Optional(CONF_PLOT, default=dict): PLOT_SCHEMA,
})


def _format_invalid(err: vol.Invalid) -> str:
    path = ".".join(str(part) for part in err.path) or "config"
    return f"{path}: {err.msg}"


@dataclass(frozen=True)
class PlotOptions:
    """Canvas and view settings for SVG output."""

    width: int = DEFAULT_CANVAS_WIDTH
    height: int = DEFAULT_CANVAS_HEIGHT
    top_axis: int = DEFAULT_TOP_AXIS
    arrows: bool = False


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run."""

    manifold: ManifoldSpec
    r: float | None = None
    radius_percentile: float = DEFAULT_RADIUS_PERCENTILE
    radius_multiplier: float = DEFAULT_RADIUS_MULTIPLIER
    k1: float = DEFAULT_K1
    k2: float = DEFAULT_K2
    epsilon_dist: float = DEFAULT_EPSILON_DIST
    dt: float = DEFAULT_DT
    max_steps: int = DEFAULT_MAX_STEPS
    converge_vel: float = DEFAULT_CONVERGE_VEL
    converge_window: int = DEFAULT_CONVERGE_WINDOW
    max_disp_frac: float = DEFAULT_MAX_DISP_FRAC
    snapshot_every: int = DEFAULT_SNAPSHOT_EVERY
    output_dir: str = DEFAULT_OUTPUT_DIR
    epsilon_adhesion: float = DEFAULT_EPSILON_ADHESION
    dimension_threshold: float = DEFAULT_DIMENSION_THRESHOLD
    plot: PlotOptions = field(default_factory=PlotOptions)

    @property
    def field_params(self) -> FieldParams:
        """Coefficients for the flattening field."""
        return FieldParams(k1=self.k1, k2=self.k2, epsilon_dist=self.epsilon_dist)

    @property
    def integrator(self) -> IntegratorConfig:
        """Integrator settings."""
        return IntegratorConfig(
            dt=self.dt,
            max_steps=self.max_steps,
            converge_vel=self.converge_vel,
            converge_window=self.converge_window,
            max_disp_frac=self.max_disp_frac,
            snapshot_every=self.snapshot_every,
        )

    def as_dict(self) -> dict[str, Any]:
        """The manifest "config" block."""
        data = asdict(self)
        data[CONF_MANIFOLD] = self.manifold.as_dict()
        return data

    def with_overrides(self, **changes: Any) -> RunConfig:
        """Validated copy with some fields replaced."""
        data = self.as_dict()
        data.update({key: value for key, value in changes.items() if value is not None})
        return RunConfig.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        """Validate a raw mapping and build the config."""
        try:
            validated = RUN_SCHEMA(data)
        except vol.MultipleInvalid as err:
            raise UsageError(f"Invalid run configuration: {'; '.join(_format_invalid(e) for e in err.errors)}") from err
        except vol.Invalid as err:
            raise UsageError(f"Invalid run configuration: {_format_invalid(err)}") from err

        validated[CONF_MANIFOLD] = ManifoldSpec.from_dict(validated[CONF_MANIFOLD])
        validated[CONF_PLOT] = PlotOptions(**PLOT_SCHEMA(validated.get(CONF_PLOT) or {}))
        config = cls(**validated)
        # Integrator and field constraints are checked before any work starts
        _ = (config.field_params, config.integrator)
        return config

    @classmethod
    def from_manifest(cls, path: str | Path) -> RunConfig:
        """Reload the config recorded in a run's manifest.json (or its directory)."""
        path = Path(path)
        if path.is_dir():
            path = path / MANIFEST_FILE
        try:
            manifest = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as err:
            raise ManifestError(f"Manifest not found: {path}") from err
        except (OSError, json.JSONDecodeError) as err:
            raise ManifestError(f"Cannot read manifest {path}: {err}") from err

        if not isinstance(manifest, dict) or not isinstance(manifest.get("config"), dict):
            raise ManifestError(f"Manifest {path} has no config block")
        _LOGGER.debug("Loaded run configuration from %s", path)
        return cls.from_dict(manifest["config"])
