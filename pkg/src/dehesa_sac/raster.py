"""Orthophoto and ground-truth loading with world-file georeferencing.

Images are 24-bit BMP (the archival format) or PNG; a TFW sidecar
carries the pixel size in meters. Ground truth is an indexed PNG with
labels {0=soil, 1=tree, 2=shrub}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

SOIL, TREE, SHRUB = 0, 1, 2

# Palette mirrors the convention of the manual annotations:
# soil black, tree crowns green, shrubs yellow.
LABEL_PALETTE = [(0, 0, 0), (0, 200, 0), (255, 220, 0)]


class RasterError(ValueError):
    """Malformed image, world file or ground-truth mask."""


@dataclass(frozen=True)
class WorldFile:
    pixel_size_x: float
    rot_y: float
    rot_x: float
    pixel_size_y: float  # negative for north-up rasters
    origin_x: float
    origin_y: float

    def __post_init__(self):
        if self.pixel_size_x <= 0:
            raise RasterError(f"pixel_size_x must be > 0, got {self.pixel_size_x}")
        if self.pixel_size_y == 0:
            raise RasterError("pixel_size_y must be nonzero")

    @classmethod
    def from_path(cls, path) -> "WorldFile":
        lines = Path(path).read_text().split()
        if len(lines) != 6:
            raise RasterError(f"world file {path} must have 6 numeric lines")
        try:
            values = [float(v) for v in lines]
        except ValueError as exc:
            raise RasterError(f"non-numeric world-file entry in {path}: {exc}") from exc
        return cls(values[0], values[1], values[2], values[3], values[4], values[5])

    def to_lines(self) -> str:
        vals = (self.pixel_size_x, self.rot_y, self.rot_x,
                self.pixel_size_y, self.origin_x, self.origin_y)
        return "".join(f"{v}\n" for v in vals)


@dataclass(frozen=True)
class Orthophoto:
    pixels: np.ndarray  # (height, width, 3) uint8, row-major, top-left origin
    geo: WorldFile
    id: str

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise RasterError("pixels must be an HxWx3 array")
        if self.pixels.size == 0:
            raise RasterError("image has zero pixels")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def n_pixels(self) -> int:
        return self.height * self.width


@dataclass(frozen=True)
class GroundTruthMask:
    labels: np.ndarray  # (height, width) uint8 in {0, 1, 2}
    image_id: str

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


def load_orthophoto(image_path, world_path=None, assume_pixel_size: float | None = None) -> Orthophoto:
    """Load a BMP/PNG orthophoto and its TFW sidecar.

    ``world_path`` defaults to the image path with a .tfw suffix. When
    the sidecar is missing, ``assume_pixel_size`` builds a synthetic
    world file (with a warning) instead of failing.
    """
    image_path = Path(image_path)
    try:
        with Image.open(image_path) as im:
            rgb = im.convert("RGB")
            pixels = np.asarray(rgb, dtype=np.uint8)
    except (OSError, SyntaxError) as exc:
        raise RasterError(f"cannot read image {image_path}: {exc}") from exc

    if world_path is None:
        world_path = image_path.with_suffix(".tfw")
    world_path = Path(world_path)
    if world_path.exists():
        geo = WorldFile.from_path(world_path)
    elif assume_pixel_size is not None:
        warnings.warn(
            f"no world file for {image_path.name}; assuming "
            f"{assume_pixel_size} m/pixel",
            stacklevel=2,
        )
        geo = WorldFile(assume_pixel_size, 0.0, 0.0, -assume_pixel_size, 0.0, 0.0)
    else:
        raise RasterError(f"world file {world_path} not found")

    return Orthophoto(pixels=pixels, geo=geo, id=image_path.stem)


def save_orthophoto(photo: Orthophoto, image_path, world_path=None) -> None:
    image_path = Path(image_path)
    Image.fromarray(photo.pixels, mode="RGB").save(image_path)
    if world_path is None:
        world_path = image_path.with_suffix(".tfw")
    Path(world_path).write_text(photo.geo.to_lines())


def feature_matrix(photo: Orthophoto) -> np.ndarray:
    """Per-pixel RGB rows as reals; row k corresponds to pixel (y, x) with
    k = y * width + x."""
    return photo.pixels.reshape(-1, 3).astype(float)


def image_area_m2(photo: Orthophoto) -> float:
    """Ground area covered by the raster, in square meters."""
    return (
        photo.width * abs(photo.geo.pixel_size_x)
        * photo.height * abs(photo.geo.pixel_size_y)
    )


def load_ground_truth(mask_path, photo: Orthophoto) -> GroundTruthMask:
    """Load an indexed (or grayscale) PNG label mask paired with ``photo``."""
    mask_path = Path(mask_path)
    try:
        with Image.open(mask_path) as im:
            if im.mode not in ("P", "L"):
                raise RasterError(
                    f"ground truth {mask_path.name} must be indexed or grayscale, "
                    f"got mode {im.mode}"
                )
            labels = np.asarray(im, dtype=np.uint8)
    except (OSError, SyntaxError) as exc:
        raise RasterError(f"cannot read mask {mask_path}: {exc}") from exc

    if labels.shape != (photo.height, photo.width):
        raise RasterError(
            f"mask {mask_path.name} is {labels.shape[1]}x{labels.shape[0]}, "
            f"photo {photo.id} is {photo.width}x{photo.height}"
        )
    if labels.max(initial=0) > SHRUB:
        raise RasterError(
            f"mask {mask_path.name} contains labels outside {{0,1,2}}"
        )
    return GroundTruthMask(labels=labels, image_id=photo.id)


def save_label_mask(labels: np.ndarray, path) -> None:
    """Write a {0,1,2} label array as an indexed PNG with the standard palette."""
    im = Image.fromarray(labels.astype(np.uint8), mode="P")
    palette = []
    for rgb in LABEL_PALETTE:
        palette.extend(rgb)
    im.putpalette(palette)
    im.save(path)
