"""Canopy-cover (SAC) estimation for dehesa pastureland from RGB orthophotos."""

from .clustering import (
    ClusterModel,
    DegenerateClusterError,
    FitResult,
    GKBClustering,
    GkbParams,
    fit_gkb,
)
from .evaluation import (
    MetricReport,
    evaluate,
    false_negative_rate,
    false_positive_rate,
    jaccard,
    non_uniformity,
)
from .raster import (
    GroundTruthMask,
    Orthophoto,
    WorldFile,
    feature_matrix,
    image_area_m2,
    load_ground_truth,
    load_orthophoto,
)
from .segmentation import (
    Blob,
    SegmentationConfig,
    SegmentationOutput,
    segment,
)
from .stocking import StockingTable, load_interpolated, load_step

__version__ = "0.1.0"

__all__ = [
    "Blob",
    "ClusterModel",
    "DegenerateClusterError",
    "FitResult",
    "GKBClustering",
    "GkbParams",
    "GroundTruthMask",
    "MetricReport",
    "Orthophoto",
    "SegmentationConfig",
    "SegmentationOutput",
    "StockingTable",
    "WorldFile",
    "evaluate",
    "false_negative_rate",
    "false_positive_rate",
    "feature_matrix",
    "fit_gkb",
    "image_area_m2",
    "jaccard",
    "load_ground_truth",
    "load_interpolated",
    "load_orthophoto",
    "load_step",
    "non_uniformity",
    "segment",
]
