"""Per-orthophoto segmentation pipeline.

Fits GK-B in RGB space, picks the vegetation cluster(s) by excess-green,
binarizes by maximum membership, labels connected blobs, splits them
into tree crowns and shrubs by area, and computes the covered wooded
area (SAC) percentage.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .clustering import FitResult, GkbParams, fit_gkb
from .raster import SHRUB, SOIL, TREE, Orthophoto, feature_matrix

DEFAULT_SHRUB_THRESHOLD_PX = 1650

# Auto-escalation bounds on the vegetation fraction at c=2; outside them
# the image is re-run with c=3 and flagged for review.
AUTO_ESCALATION_MIN_FRACTION = 0.005
AUTO_ESCALATION_MAX_FRACTION = 0.85


class UnclassifiableImageError(RuntimeError):
    """All cluster prototypes tie on excess-green; needs an operator."""


@dataclass(frozen=True)
class SegmentationConfig:
    gkb: GkbParams = field(default_factory=GkbParams)
    shrub_threshold_px: int = DEFAULT_SHRUB_THRESHOLD_PX
    connectivity: int = 8
    escalation: str = "manual"  # "manual" | "auto"

    def __post_init__(self):
        if self.shrub_threshold_px < 0:
            raise ValueError("shrub_threshold_px must be >= 0")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")
        if self.escalation not in ("manual", "auto"):
            raise ValueError("escalation must be 'manual' or 'auto'")


@dataclass(frozen=True)
class Blob:
    id: int
    pixel_count: int
    bounding_box: tuple[int, int, int, int]  # (x0, y0, x1, y1) inclusive
    touches_border: bool
    kind: str = ""  # "tree" | "shrub"


@dataclass(frozen=True)
class SegmentationOutput:
    mask: np.ndarray  # (H, W) labels in {SOIL, TREE, SHRUB}
    blobs: tuple[Blob, ...]
    fit: FitResult
    class_count_used: int
    vegetation_cluster_ids: frozenset[int]
    sac_percent: float
    shrub_percent: float
    soil_percent: float
    needs_review: bool = False


def excess_green(prototypes: np.ndarray) -> np.ndarray:
    """2G - R - B per prototype; higher means greener."""
    return 2 * prototypes[:, 1] - prototypes[:, 0] - prototypes[:, 2]


def classify_clusters(prototypes: np.ndarray) -> frozenset[int]:
    """Pick the vegetation cluster(s): the argmax of excess-green.

    Ties at the maximum keep all tied clusters as vegetation; a tie
    across *all* clusters is unresolvable and raises.
    """
    if prototypes.shape[0] < 2:
        raise ValueError("cluster classification needs at least 2 clusters")
    exg = excess_green(prototypes)
    if np.ptp(exg) == 0:
        raise UnclassifiableImageError(
            "all prototypes have identical excess-green; cannot pick vegetation"
        )
    best = exg.max()
    return frozenset(int(i) for i in np.flatnonzero(exg == best))


def binarize(fit: FitResult, vegetation_ids, shape: tuple[int, int]) -> np.ndarray:
    """Boolean vegetation mask from max-membership defuzzification.

    Ties go to the lowest cluster index (argmax behaviour).
    """
    hard = np.argmax(fit.membership, axis=0)
    return np.isin(hard, list(vegetation_ids)).reshape(shape)


def _structure(connectivity: int) -> np.ndarray:
    if connectivity == 8:
        return np.ones((3, 3), dtype=bool)
    return ndimage.generate_binary_structure(2, 1)


def label_blobs(binary: np.ndarray, connectivity: int = 8) -> tuple[np.ndarray, list[Blob]]:
    """Connected foreground components and their summaries.

    Returns the label image (0 = background, blobs numbered from 1) and
    the blob list.
    """
    labeled, count = ndimage.label(binary, structure=_structure(connectivity))
    blobs = []
    h, w = binary.shape
    slices = ndimage.find_objects(labeled)
    for idx, sl in enumerate(slices, start=1):
        ys, xs = sl
        pixel_count = int((labeled[sl] == idx).sum())
        touches = (
            ys.start == 0 or xs.start == 0 or ys.stop == h or xs.stop == w
        )
        blobs.append(
            Blob(
                id=idx,
                pixel_count=pixel_count,
                bounding_box=(xs.start, ys.start, xs.stop - 1, ys.stop - 1),
                touches_border=touches,
            )
        )
    return labeled, blobs


def split_trees_shrubs(
    labeled: np.ndarray, blobs: list[Blob], shrub_threshold_px: int
) -> tuple[list[Blob], np.ndarray, np.ndarray]:
    """Classify each blob by area: <= threshold is shrub, larger is tree.

    Returns the classified blobs plus the tree and shrub masks, which
    partition the vegetation mask.
    """
    classified = [
        replace(b, kind="shrub" if b.pixel_count <= shrub_threshold_px else "tree")
        for b in blobs
    ]
    tree_ids = [b.id for b in classified if b.kind == "tree"]
    shrub_ids = [b.id for b in classified if b.kind == "shrub"]
    tree_mask = np.isin(labeled, tree_ids)
    shrub_mask = np.isin(labeled, shrub_ids)
    return classified, tree_mask, shrub_mask


def compute_sac(tree_mask: np.ndarray, n_pixels: int) -> float:
    """Covered wooded area as a percentage of the image."""
    return 100.0 * int(tree_mask.sum()) / n_pixels


def _run_once(photo: Orthophoto, config: SegmentationConfig) -> SegmentationOutput:
    data = feature_matrix(photo)
    fit = fit_gkb(data, config.gkb)
    vegetation_ids = classify_clusters(fit.model.prototypes)
    veg_mask = binarize(fit, vegetation_ids, (photo.height, photo.width))
    labeled, blobs = label_blobs(veg_mask, config.connectivity)
    blobs, tree_mask, shrub_mask = split_trees_shrubs(
        labeled, blobs, config.shrub_threshold_px
    )
    mask = np.full((photo.height, photo.width), SOIL, dtype=np.uint8)
    mask[tree_mask] = TREE
    mask[shrub_mask] = SHRUB
    n = photo.n_pixels
    return SegmentationOutput(
        mask=mask,
        blobs=tuple(blobs),
        fit=fit,
        class_count_used=config.gkb.c,
        vegetation_cluster_ids=vegetation_ids,
        sac_percent=compute_sac(tree_mask, n),
        shrub_percent=100.0 * int(shrub_mask.sum()) / n,
        soil_percent=100.0 * int((mask == SOIL).sum()) / n,
    )


def segment(photo: Orthophoto, config: SegmentationConfig) -> SegmentationOutput:
    """Run the full pipeline; in auto mode escalate to c=3 when the
    vegetation fraction at c=2 looks implausible."""
    out = _run_once(photo, config)
    if config.escalation == "auto" and config.gkb.c == 2:
        veg_fraction = (out.sac_percent + out.shrub_percent) / 100.0
        if not AUTO_ESCALATION_MIN_FRACTION <= veg_fraction <= AUTO_ESCALATION_MAX_FRACTION:
            escalated = replace(config, gkb=replace(config.gkb, c=3, rho=None))
            out = _run_once(photo, escalated)
            out = replace(out, needs_review=True)
    return out
