"""Segmentation quality metrics: FPR, FNR, Jaccard and non-uniformity (NU).

FPR/FNR/Jaccard compare a predicted binary mask against ground truth;
NU measures how homogeneous a segmented region is relative to the whole
image and needs no reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import SHRUB, SOIL, TREE, GroundTruthMask, Orthophoto

CLASS_NAMES = {SOIL: "soil", TREE: "tree", SHRUB: "shrub"}


class UndefinedMetricError(ValueError):
    """The metric's denominator is empty (no reference pixels)."""


@dataclass(frozen=True)
class MetricReport:
    image_id: str
    fpr: float | None
    fnr: float | None
    isj: float | None
    nu_by_class: dict[str, float | None]     # predicted-mask regions
    nu_by_class_gt: dict[str, float | None]  # ground-truth regions


def _check_shapes(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")


def false_positive_rate(gt_background: np.ndarray, predicted_foreground: np.ndarray) -> float:
    """Fraction of reference background misclassified as foreground."""
    _check_shapes(gt_background, predicted_foreground)
    denom = int(gt_background.sum())
    if denom == 0:
        raise UndefinedMetricError("reference background is empty")
    return int((gt_background & predicted_foreground).sum()) / denom


def false_negative_rate(gt_foreground: np.ndarray, predicted_background: np.ndarray) -> float:
    """Fraction of reference foreground missed by the prediction."""
    _check_shapes(gt_foreground, predicted_background)
    denom = int(gt_foreground.sum())
    if denom == 0:
        raise UndefinedMetricError("reference foreground is empty")
    return int((gt_foreground & predicted_background).sum()) / denom


def jaccard(pred: np.ndarray, gt: np.ndarray) -> float:
    """Intersection over union; two empty masks agree perfectly (1.0)."""
    _check_shapes(pred, gt)
    union = int((pred | gt).sum())
    if union == 0:
        return 1.0
    return int((pred & gt).sum()) / union


def non_uniformity(photo: Orthophoto, region: np.ndarray) -> float:
    """Region-size-weighted ratio of within-region to whole-image variance,
    averaged over the RGB bands. Bands with zero image variance are skipped."""
    _check_shapes(region, photo.pixels[..., 0])
    if not region.any():
        raise UndefinedMetricError("region is empty")
    weight = int(region.sum()) / photo.n_pixels
    values = []
    for band in range(3):
        channel = photo.pixels[..., band].astype(float)
        total_var = channel.var()
        if total_var == 0:
            continue
        values.append(weight * channel[region].var() / total_var)
    if not values:
        raise UndefinedMetricError("all bands have zero variance")
    return float(np.mean(values))


def evaluate(mask: np.ndarray, gt: GroundTruthMask, photo: Orthophoto,
             include_shrubs: bool = False) -> MetricReport:
    """Score a predicted label mask against ground truth.

    FPR/FNR/Jaccard are computed on the tree class only (the comparison
    target is the productive crowns); ``include_shrubs=True`` widens the
    foreground to all vegetation. NU is reported per class for both the
    predicted and the ground-truth regions. Metrics whose preconditions
    fail are reported as None rather than aborting.
    """
    if include_shrubs:
        pred_fg = (mask == TREE) | (mask == SHRUB)
        gt_fg = (gt.labels == TREE) | (gt.labels == SHRUB)
    else:
        pred_fg = mask == TREE
        gt_fg = gt.labels == TREE

    def _try(fn, *args):
        try:
            return fn(*args)
        except UndefinedMetricError:
            return None

    nu_pred = {}
    nu_gt = {}
    for value, name in CLASS_NAMES.items():
        nu_pred[name] = _try(non_uniformity, photo, mask == value)
        nu_gt[name] = _try(non_uniformity, photo, gt.labels == value)

    return MetricReport(
        image_id=gt.image_id,
        fpr=_try(false_positive_rate, ~gt_fg, pred_fg),
        fnr=_try(false_negative_rate, gt_fg, ~pred_fg),
        isj=jaccard(pred_fg, gt_fg),
        nu_by_class=nu_pred,
        nu_by_class_gt=nu_gt,
    )
