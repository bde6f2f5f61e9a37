"""Batch orchestration: segment a directory of orthophotos, evaluate
against ground truth when present, and write the run report plus label,
overlay and difference rasters."""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from . import stocking
from .evaluation import MetricReport, evaluate
from .raster import (
    SHRUB,
    TREE,
    GroundTruthMask,
    Orthophoto,
    RasterError,
    image_area_m2,
    load_ground_truth,
    load_orthophoto,
    save_label_mask,
)
from .segmentation import (
    SegmentationConfig,
    SegmentationOutput,
    UnclassifiableImageError,
    segment,
)

IMAGE_SUFFIXES = (".bmp", ".png")

FP_COLOR = (40, 90, 255)    # over-segmentation (predicted but not in reference)
FN_COLOR = (255, 140, 0)    # under-segmentation (missed reference pixels)
TREE_CONTOUR = (0, 230, 0)
SHRUB_CONTOUR = (255, 220, 0)


class BatchError(RuntimeError):
    pass


def _round(x, digits=4):
    return None if x is None else round(float(x), digits)


def _contour(mask: np.ndarray) -> np.ndarray:
    return mask & ~ndimage.binary_erosion(mask, border_value=0)


def overlay_image(photo: Orthophoto, mask: np.ndarray) -> np.ndarray:
    """Original pixels with tree contours in green and shrub contours in yellow."""
    out = photo.pixels.copy()
    out[_contour(mask == TREE)] = TREE_CONTOUR
    out[_contour(mask == SHRUB)] = SHRUB_CONTOUR
    return out


def diff_image(photo: Orthophoto, mask: np.ndarray, gt: GroundTruthMask) -> np.ndarray:
    """Grayscale base with false positives in blue and false negatives in orange,
    computed on the tree class."""
    gray = photo.pixels.mean(axis=2).astype(np.uint8)
    out = np.stack([gray, gray, gray], axis=2)
    pred = mask == TREE
    ref = gt.labels == TREE
    out[pred & ~ref] = FP_COLOR
    out[ref & ~pred] = FN_COLOR
    return out


def _metrics_dict(m: MetricReport) -> dict:
    return {
        "fpr": _round(m.fpr),
        "fnr": _round(m.fnr),
        "isj": _round(m.isj),
        "nu_predicted": {k: _round(v) for k, v in m.nu_by_class.items()},
        "nu_ground_truth": {k: _round(v) for k, v in m.nu_by_class_gt.items()},
    }


def _blob_summary(output: SegmentationOutput) -> dict:
    trees = [b for b in output.blobs if b.kind == "tree"]
    shrubs = [b for b in output.blobs if b.kind == "shrub"]
    return {
        "tree_count": len(trees),
        "shrub_count": len(shrubs),
        "largest_tree_px": max((b.pixel_count for b in trees), default=0),
        "border_blob_count": sum(1 for b in output.blobs if b.touches_border),
    }


def process_image(
    image_path: Path,
    gt_path: Path | None,
    config: SegmentationConfig,
    output_dir: Path,
    assume_pixel_size: float | None = None,
) -> dict:
    """Segment one orthophoto, write its rasters, return its report entry."""
    photo = load_orthophoto(image_path, assume_pixel_size=assume_pixel_size)
    output = segment(photo, config)

    save_label_mask(output.mask, output_dir / f"{photo.id}_mask.png")
    Image.fromarray(overlay_image(photo, output.mask)).save(
        output_dir / f"{photo.id}_overlay.png"
    )

    entry = {
        "image_id": photo.id,
        "sac_percent": _round(output.sac_percent),
        "shrub_percent": _round(output.shrub_percent),
        "soil_percent": _round(output.soil_percent),
        "class_count_used": output.class_count_used,
        "needs_review": output.needs_review,
        "area_m2": _round(image_area_m2(photo)),
        "blobs": _blob_summary(output),
        "clustering": {
            "iterations": output.fit.iterations,
            "converged": output.fit.converged,
            "final_delta": _round(output.fit.final_delta, 8),
            "prototypes": [[_round(v) for v in p] for p in output.fit.model.prototypes],
        },
        "metrics": None,
        "error": None,
    }

    if gt_path is not None:
        gt = load_ground_truth(gt_path, photo)
        report = evaluate(output.mask, gt, photo)
        entry["metrics"] = _metrics_dict(report)
        Image.fromarray(diff_image(photo, output.mask, gt)).save(
            output_dir / f"{photo.id}_diff.png"
        )

    # Weighted-aggregate bookkeeping, stripped before serialization.
    entry["_pixels"] = photo.n_pixels
    entry["_counts"] = {
        "tree": int((output.mask == TREE).sum()),
        "shrub": int((output.mask == SHRUB).sum()),
    }
    return entry


def aggregate_report(entries: list[dict], table: stocking.StockingTable | None = None) -> dict:
    """Pixel-weighted aggregate over successful images, plus stocking loads."""
    table = table or stocking.StockingTable()
    ok = [e for e in entries if e.get("error") is None]
    total_px = sum(e["_pixels"] for e in ok)
    if total_px == 0:
        return {"image_count": len(entries), "segmented_count": 0}
    tree_px = sum(e["_counts"]["tree"] for e in ok)
    shrub_px = sum(e["_counts"]["shrub"] for e in ok)
    sac = 100.0 * tree_px / total_px
    shrub = 100.0 * shrub_px / total_px
    total_area_m2 = sum(e["area_m2"] for e in ok)

    nu_means = {}
    for cls in ("tree", "shrub", "soil"):
        vals = [
            e["metrics"]["nu_predicted"][cls]
            for e in ok
            if e["metrics"] and e["metrics"]["nu_predicted"][cls] is not None
        ]
        nu_means[cls] = _round(np.mean(vals)) if vals else None

    return {
        "image_count": len(entries),
        "segmented_count": len(ok),
        "mean_sac_percent": _round(sac),
        "mean_shrub_percent": _round(shrub),
        "mean_soil_percent": _round(100.0 - sac - shrub),
        "mean_nu_predicted": nu_means,
        "stocking_load_step": table.load_step(sac),
        "stocking_load_interpolated": _round(table.load_interpolated(sac)),
        "total_area_m2": _round(total_area_m2),
        "total_area_ha": _round(total_area_m2 / 10_000.0),
    }


def _config_dict(config: SegmentationConfig) -> dict:
    d = dataclasses.asdict(config)
    d["gkb"]["beta"] = float(d["gkb"]["beta"])
    return d


def find_images(input_dir: Path) -> list[Path]:
    return sorted(
        p for p in Path(input_dir).iterdir()
        if p.suffix.lower() in IMAGE_SUFFIXES
    )


def worker_count(n_images: int) -> int:
    env = os.environ.get("SAC_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, min(n_images, os.cpu_count() or 1))


def run_batch(
    input_dir,
    gt_dir,
    config: SegmentationConfig,
    output_dir,
    assume_pixel_size: float | None = None,
    table: stocking.StockingTable | None = None,
) -> dict:
    """Segment every image in ``input_dir`` and write ``report.json`` plus
    per-image rasters into ``output_dir``. Per-image failures are recorded
    in the report; the batch keeps going."""
    input_dir = Path(input_dir)
    output_dir = Path(output_dir)
    images = find_images(input_dir)
    if not images:
        raise BatchError(f"no .bmp/.png images found in {input_dir}")
    output_dir.mkdir(parents=True, exist_ok=True)

    def gt_for(image_path: Path) -> Path | None:
        if gt_dir is None:
            return None
        candidate = Path(gt_dir) / f"{image_path.stem}.png"
        return candidate if candidate.exists() else None

    def run_one(image_path: Path) -> dict:
        try:
            return process_image(
                image_path, gt_for(image_path), config, output_dir,
                assume_pixel_size=assume_pixel_size,
            )
        except (RasterError, RuntimeError, ValueError) as exc:
            return {
                "image_id": image_path.stem,
                "error": f"{type(exc).__name__}: {exc}",
                "needs_review": isinstance(exc, UnclassifiableImageError),
                "_pixels": 0,
                "_counts": {"tree": 0, "shrub": 0},
            }

    with ThreadPoolExecutor(max_workers=worker_count(len(images))) as pool:
        entries = list(pool.map(run_one, images))
    entries.sort(key=lambda e: e["image_id"])

    report = {
        "config": _config_dict(config),
        "per_image": [
            {k: v for k, v in e.items() if not k.startswith("_")} for e in entries
        ],
        "aggregate": aggregate_report(entries, table),
    }
    (output_dir / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n"
    )
    return report
