"""Command-line interface: simulate, fit, metrics, batch.

Exit codes are a stable contract for scripting: 0 success, 1 usage or
data error, 2 run timeout.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import lanefit, metrics as metrics_mod, scenario as scenario_mod
from .exceptions import EmptyLog, LanetrackError
from .simulator import run

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TIMEOUT = 2


def _read_log_csv(path):
    """Read a trajectory CSV back into column arrays."""
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyLog(f"{path} is empty")
        rows = list(reader)
    if not rows:
        raise EmptyLog(f"{path} has no data rows")
    required = ["t", "x", "y", "phi", "v_app", "omega_app"]
    idx = {}
    for name in required:
        if name not in header:
            raise LanetrackError(f"{path} is missing column {name!r}")
        idx[name] = header.index(name)
    cols = {name: np.array([float(r[idx[name]]) for r in rows]) for name in required}
    return cols


def _metrics_json(cols, path_pts, v_t) -> str:
    report = metrics_mod.compute_metrics(
        cols["t"],
        np.column_stack((cols["x"], cols["y"])),
        cols["phi"],
        cols["v_app"],
        cols["omega_app"],
        path_pts,
        v_t,
    )
    return json.dumps(report.as_dict(), indent=2) + "\n"


def _write_series(path: Path, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{x:.9g}" for x in row) + "\n")


@click.group()
def main():
    """Lane-following simulator, lane fitting, and trajectory metrics."""


@main.command("simulate")
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option(
    "--set",
    "overrides",
    multiple=True,
    metavar="KEY=VALUE",
    help="Override a scenario field by dotted path, e.g. controller=comparative "
    "or sensor.point_noise_sigma=0.05.",
)
@click.option(
    "--emit",
    default="log_csv,metrics_json,plotdata",
    show_default=True,
    help="Comma-separated subset of {log_csv,metrics_json,plotdata}.",
)
def cmd_simulate(scenario_path, out_dir, overrides, emit):
    """Run one scenario and write trajectory, metrics, and plot series."""
    emit_set = {e.strip() for e in emit.split(",") if e.strip()}
    unknown = emit_set - {"log_csv", "metrics_json", "plotdata"}
    if unknown:
        click.echo(f"error: unknown emit target(s): {sorted(unknown)}", err=True)
        sys.exit(EXIT_ERROR)
    try:
        data = scenario_mod.load_scenario_dict(scenario_path)
        for ov in overrides:
            if "=" not in ov:
                raise KeyError(f"override {ov!r} is not KEY=VALUE")
            key, _, value = ov.partition("=")
            scenario_mod.apply_override(data, key, value)
        sc = scenario_mod.scenario_from_dict(data)
    except (KeyError, LanetrackError, json.JSONDecodeError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)

    log = run(sc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    log_path = out / "trajectory.csv"
    log.to_csv(log_path)

    if "metrics_json" in emit_set:
        # recompute from the CSV so file outputs are mutually consistent
        cols = _read_log_csv(log_path)
        (out / "metrics.json").write_text(
            _metrics_json(cols, sc.track.reference_path, sc.v_t)
        )
    if "plotdata" in emit_set:
        plot = out / "plotdata"
        plot.mkdir(exist_ok=True)
        recs = log.records
        t = [r.t for r in recs]
        _write_series(plot / "v.csv", "t,v_app,v_cmd",
                      zip(t, (r.applied.v for r in recs), (r.cmd.v for r in recs)))
        _write_series(plot / "omega.csv", "t,omega_app,omega_cmd",
                      zip(t, (r.applied.omega for r in recs), (r.cmd.omega for r in recs)))
        _write_series(plot / "x.csv", "t,x", zip(t, (r.pose.x for r in recs)))
        _write_series(plot / "y.csv", "t,y", zip(t, (r.pose.y for r in recs)))
        _write_series(plot / "phi.csv", "t,phi", zip(t, (r.pose.phi for r in recs)))
        _write_series(plot / "trajectory_xy.csv", "x,y",
                      ((r.pose.x, r.pose.y) for r in recs))
        _write_series(plot / "reference_path.csv", "x,y", sc.track.reference_path)
    if "log_csv" not in emit_set:
        log_path.unlink()

    click.echo(f"termination: {log.termination_reason} after {len(log)} steps")
    sys.exit(EXIT_TIMEOUT if log.termination_reason == "timeout" else EXIT_OK)


@main.command("fit")
@click.option("--input", "in_csv", required=True, type=click.Path(exists=True))
@click.option("--delta-s", default=lanefit.DEFAULT_DELTA_S, show_default=True)
@click.option("--lane-width", default=lanefit.DEFAULT_LANE_WIDTH, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path())
def cmd_fit(in_csv, delta_s, lane_width, out_path):
    """Fit lane files offline: ROI filter, resample, cubic fit, centerline.

    The input CSV needs lane_id,x,y columns with lane_id in {left,right}.
    """
    lanes = {"left": [], "right": []}
    try:
        with open(in_csv) as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
            if rows and not {"lane_id", "x", "y"} <= set(reader.fieldnames or []):
                raise LanetrackError("input must have lane_id,x,y columns")
            for row in rows:
                lane = row["lane_id"].strip()
                if lane not in lanes:
                    raise LanetrackError(f"unknown lane_id {lane!r}")
                lanes[lane].append((float(row["x"]), float(row["y"])))
    except (LanetrackError, KeyError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)

    fitted = {}
    for side, pts in lanes.items():
        pts = lanefit.roi_filter(np.asarray(pts).reshape(-1, 2), lanefit.DEFAULT_ROI)
        poly = None
        if len(pts) >= 2:
            try:
                poly = lanefit.fit_cubic(lanefit.resample(pts, delta_s))
            except LanetrackError:
                poly = None
        fitted[side] = poly

    try:
        result = lanefit.centerline(fitted["left"], fitted["right"], lane_width)
    except LanetrackError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)

    def poly_dict(p):
        if p is None:
            return None
        return {"coeffs": list(p.coeffs), "x_range": [p.x_lo, p.x_hi], "order": p.order}

    payload = {
        "mode": result.mode,
        "centerline": poly_dict(result.centerline),
        "lane_left": poly_dict(result.lane_left),
        "lane_right": poly_dict(result.lane_right),
    }
    if result.centerline is not None:
        xs = np.linspace(result.centerline.x_lo, result.centerline.x_hi, 64)
        payload["centerline_samples"] = lanefit.eval_poly(result.centerline, xs).tolist()

    text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        Path(out_path).write_text(text)
    click.echo(f"mode: {result.mode}")
    if result.centerline is not None:
        click.echo("centerline coeffs: " + " ".join(f"{c:.9g}" for c in result.centerline.coeffs))
    sys.exit(EXIT_OK)


@main.command("metrics")
@click.option("--log", "log_csv", required=True, type=click.Path(exists=True))
@click.option(
    "--scenario", "scenario_path", required=True, type=click.Path(exists=True),
    help="Scenario JSON providing the reference track and target speed.",
)
def cmd_metrics(log_csv, scenario_path):
    """Print the metric vector for a trajectory CSV as JSON."""
    try:
        sc = scenario_mod.load_scenario(scenario_path)
        cols = _read_log_csv(log_csv)
        click.echo(_metrics_json(cols, sc.track.reference_path, sc.v_t), nl=False)
    except (LanetrackError, json.JSONDecodeError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    sys.exit(EXIT_OK)


@main.command("batch")
@click.option("--file", "batch_path", required=True, type=click.Path(exists=True))
def cmd_batch(batch_path):
    """Run a list of scenarios: [{"scenario": ..., "out": ..., "overrides": {...}}]."""
    try:
        jobs = json.loads(Path(batch_path).read_text())
        if not isinstance(jobs, list):
            raise LanetrackError("batch file must contain a JSON list")
    except (LanetrackError, json.JSONDecodeError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)

    worst = EXIT_OK
    for job in jobs:
        args = ["simulate", "--scenario", job["scenario"], "--out", job["out"]]
        for key, value in job.get("overrides", {}).items():
            args += ["--set", f"{key}={json.dumps(value)}"]
        try:
            main.main(args=args, standalone_mode=False, prog_name="lanetrack")
            rc = 0
        except SystemExit as exc:
            rc = int(exc.code or 0)
        worst = max(worst, rc)
    sys.exit(worst)


if __name__ == "__main__":
    main()
