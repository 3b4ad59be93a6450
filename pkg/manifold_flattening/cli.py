"""Command-line interface: generate, run, plot, metrics and experiment."""
from __future__ import annotations

import argparse
from collections.abc import Sequence
import json
import logging
from pathlib import Path
from typing import Any

from scipy.spatial.distance import pdist

from .config import RunConfig, parse_grid
from .const import (
    DEFAULT_CANVAS_HEIGHT,
    DEFAULT_CANVAS_WIDTH,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_TOP_AXIS,
    EXIT_OK,
    EXIT_USAGE,
    KIND_CSV,
    KIND_HALF_CIRCLE,
    KIND_S_CURVE,
    KIND_SPIRAL,
    PLOTS_DIR,
    SNAPSHOT_TEMPLATE,
    VERSION,
)
from .dynamics import FieldParams, ManifoldState, compute_field
from .exceptions import ManifoldFlatteningError, UsageError
from .experiments import EXPERIMENTS, acceptance_report, run_experiment
from .generators import ManifoldSpec, build_cloud, load_csv, save_csv
from .geometry import PointCloud, build_neighbor_graph, suggest_radius
from .runner import RunCoordinator, json_safe, load_run
from .svg_plot import plot_cloud

_LOGGER = logging.getLogger(__name__)

KIND_CHOICES = {
    "half-circle": KIND_HALF_CIRCLE,
    "spiral": KIND_SPIRAL,
    "s-curve": KIND_S_CURVE,
}


def _manifold_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--radius", type=float, help="Half-circle radius")
    parser.add_argument("--count", type=int, help="Number of sample points")
    parser.add_argument("--grid", type=str, help="S-curve grid as UxV, e.g. 24x15")
    parser.add_argument("--scale", type=float, help="S-curve scale factor")
    parser.add_argument("--t-start", type=float, help="Spiral parameter start")
    parser.add_argument("--t-end", type=float, help="Spiral parameter end")
    parser.add_argument("--offset", type=float, help="Spiral radial offset")


def _manifold_from_args(kind: str, args: argparse.Namespace) -> ManifoldSpec:
    """Build a ManifoldSpec from the generator flags that were given."""
    data: dict[str, Any] = {"kind": KIND_CHOICES.get(kind, kind)}
    for key in ("radius", "count", "scale", "t_start", "t_end", "offset"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if getattr(args, "grid", None):
        data["grid_u"], data["grid_v"] = parse_grid(args.grid)
    return ManifoldSpec.from_dict(data)


def _distance_summary(cloud: PointCloud) -> str:
    distances = pdist(cloud.points)
    if distances.size == 0:
        return f"N={cloud.num_points} n={cloud.dim}"
    return (
        f"N={cloud.num_points} n={cloud.dim} "
        f"min_dist={float(distances.min()):.6g} max_dist={float(distances.max()):.6g}"
    )


def cmd_generate(args: argparse.Namespace) -> int:
    """Write a generated initial manifold as CSV."""
    cloud = build_cloud(_manifold_from_args(args.kind, args))
    out = Path(args.out)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        save_csv(cloud, out)
    except OSError as err:
        raise UsageError(f"Cannot write {out}: {err}") from err
    print(f"{out}: {_distance_summary(cloud)}")
    return EXIT_OK


def _run_config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "r": args.r,
        "radius_percentile": args.radius_percentile,
        "radius_multiplier": args.radius_multiplier,
        "k1": args.k1,
        "k2": args.k2,
        "epsilon_dist": args.epsilon_dist,
        "dt": args.dt,
        "max_steps": args.max_steps,
        "converge_vel": args.converge_vel,
        "converge_window": args.converge_window,
        "max_disp_frac": args.max_disp_frac,
        "snapshot_every": args.snapshot_every,
        "output_dir": args.out,
    }

    if args.from_manifest:
        if not args.out:
            raise UsageError("--from-manifest needs --out so the recorded run is not overwritten")
        return RunConfig.from_manifest(args.from_manifest).with_overrides(**overrides)

    if args.input:
        manifold = ManifoldSpec(kind=KIND_CSV, path=str(Path(args.input).resolve()))
    elif args.kind:
        manifold = _manifold_from_args(args.kind, args)
    else:
        raise UsageError("Give a manifold kind, --input CSV or --from-manifest")

    data = RunConfig(manifold=manifold).as_dict()
    data["output_dir"] = DEFAULT_OUTPUT_DIR
    data.update({key: value for key, value in overrides.items() if value is not None})
    return RunConfig.from_dict(data)


def cmd_run(args: argparse.Namespace) -> int:
    """Run a simulation and write the run directory."""
    config = _run_config_from_args(args)
    result = RunCoordinator(config).execute()
    final = result.final_metrics
    print(
        json.dumps(
            json_safe(
                {
                    "output_dir": str(result.output_dir),
                    "termination": result.trajectory.termination.value,
                    "steps": result.trajectory.steps,
                    "radius": result.radius,
                    "flatness": final.get("flatness"),
                    "rms_distortion": final["topology"]["rms_distortion"],
                }
            ),
            indent=2,
            allow_nan=False,
        )
    )
    return result.exit_code


def _write_views(views: dict[str, str], out_dir: Path, stem: str) -> list[Path]:
    written = []
    for view, svg in views.items():
        name = f"{stem}.svg" if len(views) == 1 else f"{stem}_{view}.svg"
        path = out_dir / name
        try:
            path.write_text(svg, encoding="utf-8")
        except OSError as err:
            raise UsageError(f"Cannot write {path}: {err}") from err
        written.append(path)
    return written


def cmd_plot(args: argparse.Namespace) -> int:
    """Render SVGs of a CSV cloud or of every snapshot in a run directory."""
    source = Path(args.input)
    options = {"width": args.width, "height": args.height, "top_axis": args.top_axis}
    written: list[Path] = []

    if source.is_dir():
        run = load_run(source)
        out_dir = Path(args.out) if args.out else source / PLOTS_DIR
        out_dir.mkdir(parents=True, exist_ok=True)
        graph = run.graph()
        for snapshot in run.snapshots:
            vectors = None
            if args.arrows:
                vectors = compute_field(run.state(snapshot), graph, run.config.field_params).vectors
            views = plot_cloud(
                snapshot.cloud,
                title=f"Step {snapshot.step_index} (t={snapshot.time:.6g})",
                vectors=vectors,
                graph=graph if args.edges else None,
                **options,
            )
            written.extend(_write_views(views, out_dir, Path(SNAPSHOT_TEMPLATE.format(step=snapshot.step_index)).stem))
    elif source.is_file():
        cloud = load_csv(source)
        out_dir = Path(args.out) if args.out else source.parent
        out_dir.mkdir(parents=True, exist_ok=True)
        graph = None
        vectors = None
        if args.arrows or args.edges:
            radius = args.r if args.r is not None else suggest_radius(cloud)
            graph = build_neighbor_graph(cloud, radius)
            if args.arrows:
                params = FieldParams(
                    **{key: value for key, value in (("k1", args.k1), ("k2", args.k2)) if value is not None}
                )
                vectors = compute_field(ManifoldState.at_rest(cloud), graph, params).vectors
        views = plot_cloud(
            cloud,
            title=source.stem,
            vectors=vectors,
            graph=graph if args.edges else None,
            **options,
        )
        written.extend(_write_views(views, out_dir, source.stem))
    else:
        raise UsageError(f"Plot input not found: {source}")

    for path in written:
        print(path)
    _LOGGER.info("Wrote %d SVG file(s)", len(written))
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    """Print the per-snapshot metrics report of a run directory as JSON."""
    report = load_run(args.run_dir).metrics_report()
    print(json.dumps(json_safe(report), indent=2, allow_nan=False))
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    """Run a reference experiment and report its acceptance checks."""
    result, checks = run_experiment(args.name, args.out, args.max_steps)
    print(json.dumps(json_safe(acceptance_report(args.name, checks)), indent=2, allow_nan=False))
    return result.exit_code


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per operation."""
    parser = argparse.ArgumentParser(
        prog="manifold-flatten",
        description="Flatten discretized manifolds with elastic and repulsive point interactions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Log debug detail")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Log warnings and errors only")
    subparsers = parser.add_subparsers(dest="command", required=True)

    generate = subparsers.add_parser("generate", help="Write an initial manifold as CSV")
    generate.add_argument("kind", choices=sorted(KIND_CHOICES))
    _manifold_args(generate)
    generate.add_argument("--out", required=True, help="CSV file to write")
    generate.set_defaults(handler=cmd_generate)

    run = subparsers.add_parser("run", help="Run a flattening simulation")
    run.add_argument("kind", nargs="?", choices=sorted(KIND_CHOICES), help="Generated manifold to flatten")
    source = run.add_mutually_exclusive_group()
    source.add_argument("--input", help="CSV point cloud to flatten")
    source.add_argument("--from-manifest", help="Reproduce the run recorded in a manifest.json or run directory")
    _manifold_args(run)
    run.add_argument("--r", type=float, help="Neighborhood radius (default: distance heuristic)")
    run.add_argument("--radius-percentile", type=float, help="Percentile used by the radius heuristic")
    run.add_argument("--radius-multiplier", type=float, help="Multiplier used by the radius heuristic")
    run.add_argument("--k1", type=float, help="Elastic coefficient K1")
    run.add_argument("--k2", type=float, help="Repulsive coefficient K2")
    run.add_argument("--epsilon-dist", type=float, help="Pairs closer than this contribute nothing")
    run.add_argument("--dt", type=float, help="Time step")
    run.add_argument("--max-steps", type=int, help="Step budget")
    run.add_argument("--converge-vel", type=float, help="Convergence threshold on the largest field vector")
    run.add_argument("--converge-window", type=int, help="Consecutive calm evaluations needed to converge")
    run.add_argument("--max-disp-frac", type=float, help="Per-step displacement cap as a fraction of r")
    run.add_argument("--snapshot-every", type=int, help="Snapshot cadence in steps")
    run.add_argument("--out", help=f"Run directory (default: {DEFAULT_OUTPUT_DIR})")
    run.set_defaults(handler=cmd_run)

    plot = subparsers.add_parser("plot", help="Render SVG plots of a run directory or CSV")
    plot.add_argument("input", help="Run directory or CSV file")
    plot.add_argument("--arrows", action="store_true", help="Draw the deforming field")
    plot.add_argument("--edges", action="store_true", help="Draw neighbor-graph edges")
    plot.add_argument("--out", help="Directory for the SVG files")
    plot.add_argument("--width", type=int, default=DEFAULT_CANVAS_WIDTH)
    plot.add_argument("--height", type=int, default=DEFAULT_CANVAS_HEIGHT)
    plot.add_argument("--top-axis", type=int, default=DEFAULT_TOP_AXIS, help="Axis dropped by the 3-D top view")
    plot.add_argument("--r", type=float, help="Neighborhood radius for CSV input")
    plot.add_argument("--k1", type=float, help="Elastic coefficient for CSV arrows")
    plot.add_argument("--k2", type=float, help="Repulsive coefficient for CSV arrows")
    plot.set_defaults(handler=cmd_plot)

    metrics = subparsers.add_parser("metrics", help="Print the metrics report of a run directory")
    metrics.add_argument("run_dir", help="Run directory")
    metrics.set_defaults(handler=cmd_metrics)

    experiment = subparsers.add_parser("experiment", help="Run a reference experiment with acceptance checks")
    experiment.add_argument("name", choices=sorted(EXPERIMENTS))
    experiment.add_argument("--out", required=True, help="Run directory")
    experiment.add_argument("--max-steps", type=int, help="Override the step budget")
    experiment.set_defaults(handler=cmd_experiment)

    return parser


def _configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose, args.quiet)

    try:
        return int(args.handler(args))
    except ManifoldFlatteningError as err:
        _LOGGER.error("%s", err)
        return err.exit_code
    except OSError as err:
        _LOGGER.error("I/O error: %s", err)
        return EXIT_USAGE
