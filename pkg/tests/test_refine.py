import numpy as np
import pytest

from slicrefine.errors import DimensionMismatchError, NoGuidanceSignalError
from slicrefine.guidance import degrade_ground_truth
from slicrefine.imagecore import resize_mask_nearest
from slicrefine.metrics import dice
from slicrefine.refine import (
    RefineConfig,
    SuperpixelScores,
    hybrid_segment,
    parse_run_report,
    score_superpixels,
    select_best,
    synthesize_mask,
)
from slicrefine.slic import SlicConfig, SuperpixelLabeling
from slicrefine.synthetic import lesion_image


def _labeling_from(labels):
    labels = np.asarray(labels, dtype=np.int32)
    n = int(labels.max()) + 1
    h, w = labels.shape
    return SuperpixelLabeling(
        width=w, height=h, labels=labels, centers=np.zeros((n, 5)), iterations_run=1, final_residual=0.0
    )


class TestScoreSuperpixels:
    def test_all_ones_guidance(self):
        labeling = _labeling_from([[0, 0, 1, 1], [0, 0, 1, 1]])
        scores = score_superpixels(labeling, np.ones((2, 4), dtype=np.uint8))
        assert np.array_equal(scores.ratios, [1.0, 1.0])
        assert scores.best_label == 0  # tie -> smallest id

    def test_all_zeros_guidance(self):
        labeling = _labeling_from([[0, 1], [0, 1]])
        scores = score_superpixels(labeling, np.zeros((2, 2), dtype=np.uint8))
        assert np.array_equal(scores.ratios, [0.0, 0.0])
        assert scores.best_r == 0.0

    def test_partial_coverage_ratio(self):
        # superpixel of 40 px with 30 inside guidance -> 0.75
        labels = np.zeros((4, 20), dtype=np.int32)
        labels[:, 10:] = 1
        guidance = np.zeros((4, 20), dtype=np.uint8)
        guidance[0:3, 0:10] = 1  # 30 of the 40 label-0 pixels
        scores = score_superpixels(_labeling_from(labels), guidance)
        assert scores.ratios[0] == 0.75
        assert scores.ratios[1] == 0.0
        assert scores.best_label == 0

    def test_partition_property(self, rng):
        labels = rng.integers(0, 5, (16, 16)).astype(np.int32)
        guidance = (rng.random((16, 16)) < 0.4).astype(np.uint8)
        labeling = _labeling_from(labels)
        scores = score_superpixels(labeling, guidance)
        areas = np.bincount(labels.ravel(), minlength=5)
        recovered = (scores.ratios * areas).sum()
        assert recovered == pytest.approx(guidance.sum(), abs=1e-9)

    def test_max_beats_mean_pigeonhole(self, rng):
        for seed in range(10):
            g = np.random.default_rng(seed)
            labels = g.integers(0, 7, (20, 20)).astype(np.int32)
            guidance = (g.random((20, 20)) < g.uniform(0.1, 0.9)).astype(np.uint8)
            scores = score_superpixels(_labeling_from(labels), guidance)
            assert scores.best_r >= guidance.mean() - 1e-12

    def test_dimension_mismatch(self):
        labeling = _labeling_from([[0, 1], [0, 1]])
        with pytest.raises(DimensionMismatchError):
            score_superpixels(labeling, np.ones((3, 3), dtype=np.uint8))


class TestSelectBest:
    def test_argmax(self):
        scores = SuperpixelScores(ratios=np.array([0.2, 0.9, 0.4]), best_label=1, best_r=0.9)
        assert select_best(scores) == 1

    def test_tie_prefers_smallest_label(self):
        labeling = _labeling_from([[0, 1], [0, 1]])
        guidance = np.array([[1, 1], [0, 0]], dtype=np.uint8)
        scores = score_superpixels(labeling, guidance)
        assert scores.ratios[0] == scores.ratios[1] == 0.5
        assert select_best(scores) == 0

    def test_all_zero_raises(self):
        scores = SuperpixelScores(ratios=np.array([0.0, 0.0]), best_label=0, best_r=0.0)
        with pytest.raises(NoGuidanceSignalError):
            select_best(scores)


class TestSynthesizeMask:
    def test_all_labels_gives_ones(self):
        labeling = _labeling_from([[0, 1], [2, 1]])
        assert synthesize_mask(labeling, [0, 1, 2]).all()

    def test_empty_selection_gives_zeros(self):
        labeling = _labeling_from([[0, 1], [2, 1]])
        assert not synthesize_mask(labeling, []).any()

    def test_selected_area_bookkeeping(self):
        labels = np.zeros((8, 8), dtype=np.int32)
        labels[0:5, 0:2] = 0  # 10 px
        labels[0:5, 2:6] = 1  # 20 px
        labels[5:8, :] = 2
        labels[0:5, 6:8] = 2
        labeling = _labeling_from(labels)
        out = synthesize_mask(labeling, [1])
        assert int(out.sum()) == 20
        assert set(np.unique(labels[out.astype(bool)])) == {1}

    def test_unknown_label_rejected(self):
        labeling = _labeling_from([[0, 1], [0, 1]])
        with pytest.raises(ValueError):
            synthesize_mask(labeling, [5])


class TestHybridSegment:
    def test_disk_lesion_recovers_ground_truth(self):
        rng = np.random.default_rng(42)
        image, gt = lesion_image(512, rng, aspect_range=(1.0, 1.0))
        guidance = degrade_ground_truth(gt, 4, 1)
        mask, report = hybrid_segment(image, guidance)
        assert dice(mask, gt) >= 0.90
        assert report.ns == 10
        assert report.best_r > 0.5

    def test_empty_guidance_raises(self):
        rng = np.random.default_rng(1)
        image, _ = lesion_image(128, rng)
        with pytest.raises(NoGuidanceSignalError):
            hybrid_segment(image, np.zeros((32, 32), dtype=np.uint8))

    def test_deterministic_output_and_ns(self):
        rng = np.random.default_rng(7)
        image, gt = lesion_image(160, rng)
        guidance = degrade_ground_truth(gt, 4, 1)
        m1, r1 = hybrid_segment(image, guidance)
        m2, r2 = hybrid_segment(image, guidance)
        assert np.array_equal(m1, m2)
        assert r1.ns == r2.ns
        assert r1.best_r == r2.best_r
        assert r1.iterations == r2.iterations

    def test_output_is_one_connected_superpixel(self):
        from scipy import ndimage

        rng = np.random.default_rng(3)
        image, gt = lesion_image(256, rng)
        guidance = degrade_ground_truth(gt, 4, 1)
        mask, _ = hybrid_segment(image, guidance)
        _, n = ndimage.label(mask, structure=np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]]))
        assert n == 1

    def test_threshold_mode_can_select_multiple(self):
        rng = np.random.default_rng(9)
        image, gt = lesion_image(256, rng)
        guidance = degrade_ground_truth(gt, 4, 1)
        cfg = RefineConfig(selection_mode="threshold", tau=0.05)
        mask, _ = hybrid_segment(image, guidance, cfg)
        single, _ = hybrid_segment(image, guidance)
        assert mask.sum() >= single.sum()

    def test_threshold_mode_requires_tau(self):
        with pytest.raises(ValueError):
            RefineConfig(selection_mode="threshold").validate()

    def test_argmax_invariant_under_integer_upscale(self):
        # clean two-tone geometry, no smoothing: upscaling image and guidance
        # by 2 must upscale the selected superpixel's pixel set exactly
        rng = np.random.default_rng(12)
        image, gt = lesion_image(128, rng, noise_std=0.0, aspect_range=(1.0, 1.0))
        guidance = degrade_ground_truth(gt, 4, 1)
        cfg = RefineConfig(slic=SlicConfig(n_segments=1, sigma=0.0))
        mask_small, _ = hybrid_segment(image, guidance, cfg)

        big_image = np.kron(image, np.ones((2, 2, 1), dtype=np.uint8))
        big_guidance = np.kron(guidance, np.ones((2, 2), dtype=np.uint8))
        mask_big, _ = hybrid_segment(big_image, big_guidance, cfg)
        assert np.array_equal(mask_big, np.kron(mask_small, np.ones((2, 2), dtype=np.uint8)))

    def test_hybrid_beats_upscaled_guidance(self):
        rng = np.random.default_rng(100)
        image, gt = lesion_image(512, rng)
        guidance = degrade_ground_truth(gt, 4, 1)
        mask, _ = hybrid_segment(image, guidance)
        baseline = resize_mask_nearest(guidance, 512, 512)
        assert dice(mask, gt) > dice(baseline, gt)


class TestRunReport:
    def test_text_roundtrip(self):
        rng = np.random.default_rng(2)
        image, gt = lesion_image(128, rng)
        guidance = degrade_ground_truth(gt, 4, 1)
        _, report = hybrid_segment(image, guidance)
        parsed = parse_run_report(report.to_text())
        assert set(parsed) == {"ns", "sigma", "compactness", "iterations", "best_r", "ms_slic", "ms_score", "ms_total", "source"}
        assert int(parsed["ns"]) == report.ns
        assert float(parsed["best_r"]) == report.best_r
        assert parsed["source"] == "external-mask"
