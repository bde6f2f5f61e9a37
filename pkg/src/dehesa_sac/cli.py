"""Command-line front end: batch segmentation, report rendering and the
review service."""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .batch import BatchError, run_batch
from .clustering import GkbParams
from .segmentation import SegmentationConfig
from .stocking import StockingTable


def _build_config(c, m, gamma, epsilon, beta, shrub_threshold_px,
                  shrub_threshold_m2, connectivity, escalation, seed,
                  pixel_size=None) -> SegmentationConfig:
    if shrub_threshold_m2 is not None:
        if pixel_size is None:
            raise click.UsageError(
                "--shrub-threshold-m2 requires --assume-pixel-size"
            )
        shrub_threshold_px = int(round(shrub_threshold_m2 / pixel_size ** 2))
    gkb = GkbParams(c=c, m=m, epsilon=epsilon, gamma=gamma, beta=beta, seed=seed)
    return SegmentationConfig(
        gkb=gkb,
        shrub_threshold_px=shrub_threshold_px,
        connectivity=connectivity,
        escalation=escalation,
    )


@click.group()
def main():
    """Estimate dehesa canopy cover (SAC) from RGB orthophotos."""


@main.command()
@click.option("--input", "input_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--ground-truth", "gt_dir", default=None,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", "output_dir", required=True, type=click.Path(file_okay=False))
@click.option("--c", default=2, show_default=True, help="Initial cluster count.")
@click.option("--m", default=2.0, show_default=True, help="Fuzziness exponent.")
@click.option("--gamma", default=0.0, show_default=True,
              help="Covariance identity-blend weight in [0,1].")
@click.option("--epsilon", default=1e-3, show_default=True,
              help="Convergence tolerance on the membership change.")
@click.option("--beta", default=1e15, show_default=True,
              help="Covariance condition-number cap.")
@click.option("--shrub-threshold-px", default=1650, show_default=True,
              help="Blob area at or below which vegetation is labeled shrub.")
@click.option("--shrub-threshold-m2", default=None, type=float,
              help="Shrub threshold in square meters (converted via pixel size).")
@click.option("--connectivity", default=8, type=click.Choice(["4", "8"]),
              show_default=True)
@click.option("--escalation", default="manual",
              type=click.Choice(["manual", "auto"]), show_default=True,
              help="Re-run with c=3 automatically when c=2 looks implausible.")
@click.option("--seed", default=0, show_default=True)
@click.option("--assume-pixel-size", default=None, type=float,
              help="Meters per pixel when a TFW world file is missing.")
@click.option("--stocking-table", default=None, type=click.Path(exists=True, dir_okay=False),
              help="JSON bracket table overriding the built-in stocking table.")
def segment(input_dir, gt_dir, output_dir, c, m, gamma, epsilon, beta,
            shrub_threshold_px, shrub_threshold_m2, connectivity,
            escalation, seed, assume_pixel_size, stocking_table):
    """Segment a directory of orthophotos and write report + rasters."""
    config = _build_config(
        c, m, gamma, epsilon, beta, shrub_threshold_px, shrub_threshold_m2,
        int(connectivity), escalation, seed, pixel_size=assume_pixel_size,
    )
    table = StockingTable.from_json(stocking_table) if stocking_table else None
    try:
        report = run_batch(
            input_dir, gt_dir, config, output_dir,
            assume_pixel_size=assume_pixel_size, table=table,
        )
    except BatchError as exc:
        raise click.UsageError(str(exc))
    errored = [e["image_id"] for e in report["per_image"] if e.get("error")]
    agg = report["aggregate"]
    click.echo(f"segmented {agg['segmented_count']}/{agg['image_count']} images")
    if agg.get("mean_sac_percent") is not None:
        click.echo(
            f"aggregate SAC {agg['mean_sac_percent']}% over "
            f"{agg['total_area_ha']} ha; stocking load "
            f"{agg['stocking_load_step']} (step) / "
            f"{agg['stocking_load_interpolated']} (interpolated) animals/ha"
        )
    if errored:
        click.echo(f"failed: {', '.join(errored)}", err=True)
        sys.exit(1)


@main.command()
@click.option("--run", "run_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--csv", "csv_out", is_flag=True,
              help="Also write report.csv next to report.json.")
def report(run_dir, csv_out):
    """Print the per-image table from a finished run."""
    path = Path(run_dir) / "report.json"
    if not path.exists():
        raise click.UsageError(f"{path} not found; run `segment` first")
    data = json.loads(path.read_text())
    rows = data["per_image"]
    header = ["image_id", "sac_percent", "shrub_percent", "soil_percent",
              "class_count_used", "needs_review", "error"]
    click.echo("  ".join(f"{h:>16}" for h in header))
    for row in rows:
        click.echo("  ".join(f"{str(row.get(h, '')):>16}" for h in header))
    agg = data["aggregate"]
    click.echo(f"aggregate SAC: {agg.get('mean_sac_percent')}%  "
               f"area: {agg.get('total_area_ha')} ha")
    if csv_out:
        csv_path = Path(run_dir) / "report.csv"
        with csv_path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=header, extrasaction="ignore")
            writer.writeheader()
            writer.writerows(rows)
        click.echo(f"wrote {csv_path}")


@main.command()
@click.option("--workspace", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--assume-pixel-size", default=None, type=float)
@click.option("--frontend", default=None, type=click.Path(file_okay=False),
              help="Directory of built UI assets to serve at /.")
def serve(workspace, port, host, seed, assume_pixel_size, frontend):
    """Serve the review API (and optionally the UI) for a workspace."""
    import uvicorn

    from .service import create_app

    config = SegmentationConfig(gkb=GkbParams(seed=seed))
    app = create_app(
        workspace, config,
        assume_pixel_size=assume_pixel_size,
        frontend_dir=frontend,
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
