"""Run orchestration and run-directory persistence."""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
import json
import logging
import math
from pathlib import Path
import time
from typing import Any

from .config import RunConfig
from .const import (
    EXIT_INSTABILITY,
    EXIT_OK,
    MANIFEST_FILE,
    METRICS_FILE,
    SNAPSHOT_GLOB,
    SNAPSHOT_TEMPLATE,
    VERSION,
)
from .dynamics import ManifoldState, Snapshot, Termination, Trajectory, run_simulation
from .exceptions import ManifestError, UsageError
from .generators import build_cloud, load_csv, save_csv
from .geometry import NeighborGraph, PointCloud, build_neighbor_graph, suggest_radius
from .metrics import snapshot_metrics

_LOGGER = logging.getLogger(__name__)


def json_safe(data: Any) -> Any:
    """Replace NaN and infinities, which strict JSON cannot hold, with None."""
    if isinstance(data, float):
        return data if math.isfinite(data) else None
    if isinstance(data, dict):
        return {key: json_safe(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [json_safe(value) for value in data]
    return data


def write_json(path: Path, data: Any) -> Path:
    """Write strict JSON with a trailing newline; non-finite floats become null."""
    try:
        path.write_text(json.dumps(json_safe(data), indent=2, allow_nan=False) + "\n", encoding="utf-8")
    except OSError as err:
        raise UsageError(f"Cannot write {path}: {err}") from err
    return path


@dataclass
class RunResult:
    """Outcome of one executed run."""

    config: RunConfig
    radius: float
    trajectory: Trajectory
    manifest: dict[str, Any]
    output_dir: Path

    @property
    def exit_code(self) -> int:
        """Process exit code for this outcome."""
        return EXIT_INSTABILITY if self.trajectory.termination is Termination.INSTABILITY else EXIT_OK

    @property
    def final_metrics(self) -> dict[str, Any]:
        """Metrics of the last snapshot."""
        return self.manifest["metrics"]["final"]


class RunCoordinator:
    """Builds the initial manifold, runs the simulation and persists the run."""

    def __init__(self, config: RunConfig, cloud: PointCloud | None = None) -> None:
        """Initialize the coordinator, optionally with a ready-made initial cloud."""
        self.config = config
        self.output_dir = Path(config.output_dir)
        self._cloud = cloud
        self._snapshot_entries: list[dict[str, Any]] = []

    def resolve_cloud(self) -> PointCloud:
        """The initial manifold M(0)."""
        if self._cloud is None:
            self._cloud = build_cloud(self.config.manifold)
        return self._cloud

    def resolve_radius(self, cloud: PointCloud) -> float:
        """Configured radius, or the heuristic one when none is set."""
        if self.config.r is not None:
            return self.config.r
        return suggest_radius(cloud, self.config.radius_percentile, self.config.radius_multiplier)

    def _prepare_output_dir(self) -> None:
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
            stale = sorted(self.output_dir.glob(SNAPSHOT_GLOB))
            for path in stale:
                path.unlink()
        except OSError as err:
            raise UsageError(f"Output directory {self.output_dir} is not writable: {err}") from err
        if stale:
            _LOGGER.info("Removed %d snapshot file(s) left by a previous run in %s", len(stale), self.output_dir)

    def _write_snapshot(self, snapshot: Snapshot) -> None:
        name = SNAPSHOT_TEMPLATE.format(step=snapshot.step_index)
        try:
            save_csv(snapshot.cloud, self.output_dir / name)
        except OSError as err:
            raise UsageError(f"Cannot write snapshot {name}: {err}") from err
        self._snapshot_entries.append({"file": name, "step": snapshot.step_index, "time": snapshot.time})
        _LOGGER.debug("Wrote snapshot %s (t=%.6g)", name, snapshot.time)

    def execute(self) -> RunResult:
        """Run the simulation and write snapshots, manifest.json and metrics.json."""
        config = self.config
        cloud = self.resolve_cloud()
        radius = self.resolve_radius(cloud)
        self._prepare_output_dir()
        self._snapshot_entries = []

        started = datetime.now(timezone.utc)
        clock = time.perf_counter()
        trajectory = run_simulation(
            cloud,
            radius,
            config.field_params,
            config.integrator,
            on_snapshot=self._write_snapshot,
        )
        elapsed = time.perf_counter() - clock

        series = [
            snapshot_metrics(
                _state_at(cloud, snapshot),
                trajectory.graph,
                config.field_params,
                config.epsilon_adhesion,
                config.dimension_threshold,
            )
            for snapshot in trajectory.snapshots
        ]
        final_state = trajectory.final_state

        manifest = {
            "version": VERSION,
            "config": config.as_dict(),
            "radius": radius,
            "num_points": cloud.num_points,
            "dim": cloud.dim,
            "graph": trajectory.graph.summary(),
            "termination": trajectory.termination.value,
            "steps": trajectory.steps,
            "capped_steps": final_state.capped_steps,
            "degeneracy_events": final_state.degeneracy_events,
            "instability_step": trajectory.instability_step,
            "message": trajectory.message,
            "snapshots": self._snapshot_entries,
            "metrics": {"final": series[-1], "snapshots": series},
            "timing": {
                "started": started.isoformat(),
                "wall_seconds": elapsed,
                "steps_per_second": trajectory.steps / elapsed if elapsed > 0 else None,
            },
        }
        write_json(self.output_dir / MANIFEST_FILE, manifest)
        write_json(self.output_dir / METRICS_FILE, series[-1])

        _LOGGER.info(
            "Run written to %s: %s, %d steps, %d snapshots",
            self.output_dir,
            trajectory.termination.value,
            trajectory.steps,
            len(self._snapshot_entries),
        )
        return RunResult(config=config, radius=radius, trajectory=trajectory, manifest=manifest, output_dir=self.output_dir)


def _state_at(initial: PointCloud, snapshot: Snapshot) -> ManifoldState:
    return ManifoldState(initial=initial, current=snapshot.cloud, time=snapshot.time, step_index=snapshot.step_index)


@dataclass
class LoadedRun:
    """A run directory read back from disk."""

    run_dir: Path
    manifest: dict[str, Any]
    config: RunConfig
    radius: float
    snapshots: list[Snapshot]

    @property
    def initial(self) -> PointCloud:
        """M(0), the first recorded snapshot."""
        return self.snapshots[0].cloud

    def graph(self) -> NeighborGraph:
        """Rebuild the neighbor graph from the stored initial snapshot."""
        return build_neighbor_graph(self.initial, self.radius)

    def state(self, snapshot: Snapshot) -> ManifoldState:
        """Manifold state for a stored snapshot."""
        return _state_at(self.initial, snapshot)

    def metrics_report(self) -> dict[str, Any]:
        """Per-snapshot topology and spectrum series, recomputed from the CSVs."""
        graph = self.graph()
        series = [
            snapshot_metrics(
                self.state(snapshot),
                graph,
                self.config.field_params,
                self.config.epsilon_adhesion,
                self.config.dimension_threshold,
            )
            for snapshot in self.snapshots
        ]
        return {
            "run_dir": str(self.run_dir),
            "termination": self.manifest.get("termination"),
            "steps": self.manifest.get("steps"),
            "radius": self.radius,
            "snapshots": series,
        }


def load_run(run_dir: str | Path) -> LoadedRun:
    """
    Read a run directory written by RunCoordinator.

    Args:
        run_dir: Directory holding manifest.json and the snapshot CSVs

    Returns:
        The manifest, reloaded config and snapshots in step order
    """
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise ManifestError(f"Run directory not found: {run_dir}")

    config = RunConfig.from_manifest(run_dir / MANIFEST_FILE)
    manifest = json.loads((run_dir / MANIFEST_FILE).read_text(encoding="utf-8"))

    entries = manifest.get("snapshots")
    radius = manifest.get("radius")
    if not isinstance(entries, list) or not entries:
        raise ManifestError(f"Manifest in {run_dir} lists no snapshots")
    if not isinstance(radius, (int, float)) or radius <= 0:
        raise ManifestError(f"Manifest in {run_dir} has no valid radius")

    snapshots = []
    for entry in entries:
        try:
            path = run_dir / entry["file"]
            step_index = int(entry["step"])
            sim_time = float(entry["time"])
        except (KeyError, TypeError, ValueError) as err:
            raise ManifestError(f"Malformed snapshot entry in {run_dir}: {entry!r}") from err
        snapshots.append(Snapshot(step_index=step_index, time=sim_time, cloud=load_csv(path)))

    _LOGGER.debug("Loaded %d snapshots from %s", len(snapshots), run_dir)
    return LoadedRun(run_dir=run_dir, manifest=manifest, config=config, radius=float(radius), snapshots=snapshots)
