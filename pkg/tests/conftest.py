import numpy as np
import pytest

from dehesa_sac.raster import Orthophoto, WorldFile, save_orthophoto, save_label_mask

VEG_COLOR = (45, 135, 55)
SOIL_COLOR = (165, 140, 105)


def default_world(pixel_size=0.25):
    return WorldFile(pixel_size, 0.0, 0.0, -pixel_size, 500000.0, 4270000.0)


def make_photo(stencil, image_id="synthetic", noise_sigma=4.0, seed=1,
               pixel_size=0.25, veg_color=VEG_COLOR, soil_color=SOIL_COLOR):
    """Two-tone orthophoto from a boolean vegetation stencil plus mild noise."""
    stencil = np.asarray(stencil, dtype=bool)
    h, w = stencil.shape
    rng = np.random.default_rng(seed)
    pixels = np.empty((h, w, 3), dtype=float)
    pixels[~stencil] = soil_color
    pixels[stencil] = veg_color
    if noise_sigma:
        pixels += rng.normal(0, noise_sigma, pixels.shape)
    pixels = np.clip(pixels, 0, 255).round().astype(np.uint8)
    return Orthophoto(pixels=pixels, geo=default_world(pixel_size), id=image_id)


def disk_stencil(size, center, radius):
    yy, xx = np.mgrid[0:size, 0:size]
    return (yy - center[0]) ** 2 + (xx - center[1]) ** 2 <= radius ** 2


def two_blob_data(n_per_blob=250, sigma=5.0, separation=120.0, seed=7, dim=3):
    """Two well-separated Gaussian blobs plus their sample means."""
    rng = np.random.default_rng(seed)
    c0 = np.full(dim, 60.0)
    c1 = c0 + separation / np.sqrt(dim)
    a = rng.normal(c0, sigma, (n_per_blob, dim))
    b = rng.normal(c1, sigma, (n_per_blob, dim))
    data = np.vstack([a, b])
    labels = np.repeat([0, 1], n_per_blob)
    means = np.vstack([a.mean(axis=0), b.mean(axis=0)])
    return data, labels, means


@pytest.fixture
def fixture_workspace(tmp_path):
    """Four synthetic orthophotos with ground truth, ready for batch runs."""
    input_dir = tmp_path / "images"
    gt_dir = tmp_path / "gt"
    input_dir.mkdir()
    gt_dir.mkdir()
    size = 96
    # (center, radius) disks; area above 1650 px makes a tree, below a shrub,
    # matching the default split threshold so ground truth agrees with it.
    specs = [
        ("Im_01", [((48, 48), 28)]),
        ("Im_02", [((30, 30), 26), ((75, 75), 9)]),
        ("Im_03", [((48, 20), 25)]),
        ("Im_04", [((20, 70), 27), ((70, 20), 12)]),
    ]
    for idx, (image_id, disks) in enumerate(specs):
        labels = np.zeros((size, size), dtype=np.uint8)
        stencil = np.zeros((size, size), dtype=bool)
        for center, radius in disks:
            disk = disk_stencil(size, center, radius)
            stencil |= disk
            labels[disk] = 1 if disk.sum() > 1650 else 2
        photo = make_photo(stencil, image_id=image_id, seed=100 + idx)
        save_orthophoto(photo, input_dir / f"{image_id}.png")
        save_label_mask(labels, gt_dir / f"{image_id}.png")
    return input_dir, gt_dir
