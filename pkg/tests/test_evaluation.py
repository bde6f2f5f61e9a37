import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dehesa_sac.evaluation import (
    UndefinedMetricError,
    evaluate,
    false_negative_rate,
    false_positive_rate,
    jaccard,
    non_uniformity,
)
from dehesa_sac.raster import GroundTruthMask, Orthophoto

from conftest import default_world, disk_stencil, make_photo


def mask_from_bits(bits, shape=(3, 3)):
    """3x3 boolean mask from a 9-bit integer, used by the exhaustive oracle."""
    flat = np.array([(bits >> i) & 1 for i in range(shape[0] * shape[1])], bool)
    return flat.reshape(shape)


class TestFalsePositiveRate:
    def test_hand_counted_quarter(self):
        gt_bg = np.zeros((4, 4), bool)
        gt_bg[:2] = True  # 8 background pixels
        pred_fg = np.zeros((4, 4), bool)
        pred_fg[0, :2] = True  # 2 of them predicted foreground
        assert false_positive_rate(gt_bg, pred_fg) == pytest.approx(0.25)

    def test_empty_prediction_is_zero(self):
        gt_bg = np.ones((3, 3), bool)
        assert false_positive_rate(gt_bg, np.zeros((3, 3), bool)) == 0.0

    def test_total_over_segmentation_is_one(self):
        gt_bg = np.ones((3, 3), bool)
        assert false_positive_rate(gt_bg, np.ones((3, 3), bool)) == 1.0

    def test_empty_reference_rejected(self):
        with pytest.raises(UndefinedMetricError):
            false_positive_rate(np.zeros((2, 2), bool), np.ones((2, 2), bool))

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            false_positive_rate(np.ones((2, 2), bool), np.ones((3, 3), bool))


class TestFalseNegativeRate:
    def test_empty_predicted_background_is_zero(self):
        gt_fg = np.ones((3, 3), bool)
        assert false_negative_rate(gt_fg, np.zeros((3, 3), bool)) == 0.0

    def test_total_under_segmentation_is_one(self):
        gt_fg = np.ones((3, 3), bool)
        assert false_negative_rate(gt_fg, np.ones((3, 3), bool)) == 1.0

    def test_hand_counted_quarter(self):
        gt_fg = np.zeros((4, 4), bool)
        gt_fg[0, :4] = True  # 4 foreground pixels
        pred_bg = np.zeros((4, 4), bool)
        pred_bg[0, 0] = True  # 1 of them missed
        assert false_negative_rate(gt_fg, pred_bg) == pytest.approx(0.25)

    def test_empty_reference_rejected(self):
        with pytest.raises(UndefinedMetricError):
            false_negative_rate(np.zeros((2, 2), bool), np.ones((2, 2), bool))


class TestJaccard:
    def test_identical_masks(self):
        m = disk_stencil(8, (4, 4), 2)
        assert jaccard(m, m) == 1.0

    def test_disjoint_masks(self):
        a = np.zeros((2, 2), bool)
        b = np.zeros((2, 2), bool)
        a[0, 0] = True
        b[1, 1] = True
        assert jaccard(a, b) == 0.0

    def test_half_overlap_is_one_third(self):
        # |A|=|B|=2k, |A and B|=k -> k/(3k).
        a = np.zeros((1, 6), bool)
        b = np.zeros((1, 6), bool)
        a[0, :4] = True
        b[0, 2:6] = True
        assert jaccard(a, b) == pytest.approx(1 / 3)

    def test_both_empty_is_one(self):
        empty = np.zeros((2, 2), bool)
        assert jaccard(empty, empty) == 1.0

    @given(a=st.integers(0, 511), b=st.integers(0, 511))
    @settings(max_examples=100, deadline=None)
    def test_symmetry(self, a, b):
        ma, mb = mask_from_bits(a), mask_from_bits(b)
        assert jaccard(ma, mb) == jaccard(mb, ma)


class TestExhaustiveOracle:
    def test_all_3x3_pairs_match_set_arithmetic(self):
        # Independent oracle: masks as index sets, metrics as cardinality
        # ratios. Sampled subset here; the acceptance suite runs all pairs.
        rng = np.random.default_rng(0)
        pairs = rng.integers(0, 512, size=(400, 2))
        for gt_bits, pred_bits in pairs:
            gt = mask_from_bits(int(gt_bits))
            pred = mask_from_bits(int(pred_bits))
            gt_set = {i for i in range(9) if (gt_bits >> i) & 1}
            pred_set = {i for i in range(9) if (pred_bits >> i) & 1}
            bg_set = set(range(9)) - gt_set
            if bg_set:
                assert false_positive_rate(~gt, pred) == len(bg_set & pred_set) / len(bg_set)
            if gt_set:
                assert false_negative_rate(gt, ~pred) == len(gt_set - pred_set) / len(gt_set)
            union = gt_set | pred_set
            expected = len(gt_set & pred_set) / len(union) if union else 1.0
            assert jaccard(pred, gt) == expected


class TestMonotoneCoupling:
    def test_growing_prediction_raises_fpr_lowers_fnr(self):
        rng = np.random.default_rng(1)
        gt = rng.random((8, 8)) < 0.5
        pred = np.zeros((8, 8), bool)
        order = list(itertools.product(range(8), range(8)))
        rng.shuffle(order)
        last_fpr, last_fnr = 0.0, 1.0
        for y, x in order[:40]:
            pred[y, x] = True
            fpr = false_positive_rate(~gt, pred)
            fnr = false_negative_rate(gt, ~pred)
            assert fpr >= last_fpr - 1e-12
            assert fnr <= last_fnr + 1e-12
            last_fpr, last_fnr = fpr, fnr


class TestNonUniformity:
    def test_uniform_region_is_zero(self):
        stencil = disk_stencil(16, (8, 8), 4)
        photo = make_photo(stencil, noise_sigma=0)
        assert non_uniformity(photo, stencil) == pytest.approx(0.0)

    def test_whole_image_region_is_one(self):
        photo = make_photo(disk_stencil(16, (8, 8), 4), noise_sigma=2.0, seed=3)
        region = np.ones((16, 16), bool)
        assert non_uniformity(photo, region) == pytest.approx(1.0)

    def test_checkerboard_single_color_region(self):
        pixels = np.zeros((8, 8, 3), dtype=np.uint8)
        pixels[::2, ::2] = 200
        pixels[1::2, 1::2] = 200
        photo = Orthophoto(pixels=pixels, geo=default_world(), id="check")
        region = pixels[..., 0] == 200
        assert non_uniformity(photo, region) == pytest.approx(0.0)

    def test_empty_region_rejected(self):
        photo = make_photo(disk_stencil(8, (4, 4), 2))
        with pytest.raises(UndefinedMetricError):
            non_uniformity(photo, np.zeros((8, 8), bool))

    def test_constant_image_rejected(self):
        pixels = np.full((4, 4, 3), 9, dtype=np.uint8)
        photo = Orthophoto(pixels=pixels, geo=default_world(), id="flat")
        with pytest.raises(UndefinedMetricError):
            non_uniformity(photo, np.ones((4, 4), bool))

    def test_zero_variance_band_skipped(self):
        # Red band constant, green/blue varying: the average must use
        # only the two informative bands.
        pixels = np.zeros((4, 4, 3), dtype=np.uint8)
        pixels[..., 0] = 50
        pixels[:2, :, 1] = 100
        pixels[:2, :, 2] = 100
        photo = Orthophoto(pixels=pixels, geo=default_world(), id="bands")
        region = np.zeros((4, 4), bool)
        region[:2] = True
        assert non_uniformity(photo, region) == pytest.approx(0.0)

    def test_range_on_random_regions(self):
        rng = np.random.default_rng(5)
        photo = make_photo(disk_stencil(12, (6, 6), 3), noise_sigma=5.0, seed=6)
        for _ in range(20):
            region = rng.random((12, 12)) < 0.5
            if region.any():
                assert 0.0 <= non_uniformity(photo, region) <= 1.0 + 1e-9


class TestEvaluate:
    def _photo_gt(self):
        stencil = disk_stencil(32, (16, 16), 8)
        photo = make_photo(stencil, seed=7)
        labels = np.where(stencil, 1, 0).astype(np.uint8)
        return photo, GroundTruthMask(labels=labels, image_id=photo.id)

    def test_perfect_prediction(self):
        photo, gt = self._photo_gt()
        report = evaluate(gt.labels.copy(), gt, photo)
        assert report.fpr == 0.0
        assert report.fnr == 0.0
        assert report.isj == 1.0
        assert report.image_id == photo.id

    def test_dilated_prediction_in_oracle_range(self):
        from scipy import ndimage
        photo, gt = self._photo_gt()
        tree = gt.labels == 1
        dilated = ndimage.binary_dilation(tree)
        pred = np.where(dilated, 1, 0).astype(np.uint8)
        # Oracle range computed from the known dilation geometry:
        # intersection = |tree|, union = |dilated|.
        expected = tree.sum() / dilated.sum()
        report = evaluate(pred, gt, photo)
        assert report.isj == pytest.approx(expected)
        assert 0.7 < report.isj < 1.0
        assert report.fnr == 0.0
        assert report.fpr > 0.0

    def test_missing_classes_reported_as_none(self):
        photo, gt = self._photo_gt()
        pred = np.zeros_like(gt.labels)  # all soil
        report = evaluate(pred, gt, photo)
        assert report.nu_by_class["tree"] is None
        assert report.nu_by_class["shrub"] is None
        assert report.nu_by_class["soil"] is not None
        assert report.isj == 0.0

    def test_shrub_inclusive_variant(self):
        photo, gt = self._photo_gt()
        shrub_pred = np.where(gt.labels == 1, 2, 0).astype(np.uint8)
        strict = evaluate(shrub_pred, gt, photo)
        inclusive = evaluate(shrub_pred, gt, photo, include_shrubs=True)
        assert strict.isj == 0.0
        assert inclusive.isj == 1.0
