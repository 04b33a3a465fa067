import numpy as np
import pytest
from PIL import Image

from slicrefine.errors import DecodeError, TooSmallError
from slicrefine.imagecore import (
    connected_components,
    load_image,
    load_labels_pgm,
    load_mask,
    normalize,
    resize_mask_nearest,
    save_labels_pgm,
    save_mask,
)


def _write_png(path, arr, mode):
    Image.fromarray(arr, mode=mode).save(path)


class TestLoadImage:
    def test_rgb_identity_decode(self, tmp_path):
        arr = np.arange(1024 * 1024 * 3, dtype=np.uint64).reshape(1024, 1024, 3) % 256
        arr = arr.astype(np.uint8)
        _write_png(tmp_path / "a.png", arr, "RGB")
        img = load_image(tmp_path / "a.png")
        assert img.shape == (1024, 1024, 3)
        assert np.array_equal(img, arr)

    def test_grayscale_replicates_channels(self, tmp_path):
        gray = np.arange(25, dtype=np.uint8).reshape(5, 5) * 10
        _write_png(tmp_path / "g.png", gray, "L")
        img = load_image(tmp_path / "g.png")
        assert img.shape == (5, 5, 3)
        assert np.array_equal(img[:, :, 0], gray)
        assert np.array_equal(img[:, :, 1], img[:, :, 2])

    def test_truncated_file_is_decode_error(self, tmp_path):
        _write_png(tmp_path / "t.png", np.zeros((64, 64), dtype=np.uint8), "L")
        data = (tmp_path / "t.png").read_bytes()
        (tmp_path / "t.png").write_bytes(data[: len(data) // 2])
        with pytest.raises(DecodeError):
            load_image(tmp_path / "t.png")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.png")

    def test_too_small(self, tmp_path):
        _write_png(tmp_path / "s.png", np.zeros((2, 8), dtype=np.uint8), "L")
        with pytest.raises(TooSmallError):
            load_image(tmp_path / "s.png")

    def test_ppm_roundtrip(self, tmp_path):
        arr = np.random.default_rng(0).integers(0, 256, (16, 12, 3), dtype=np.uint8)
        Image.fromarray(arr, "RGB").save(tmp_path / "p.ppm")
        assert np.array_equal(load_image(tmp_path / "p.ppm"), arr)


class TestLoadMask:
    def test_0_255_thresholds_to_binary(self, tmp_path):
        arr = np.array([[0, 255], [255, 0]], dtype=np.uint8)
        _write_png(tmp_path / "m.png", arr, "L")
        mask = load_mask(tmp_path / "m.png")
        assert np.array_equal(mask, np.array([[0, 1], [1, 0]], dtype=np.uint8))

    def test_threshold_boundary_at_128(self, tmp_path):
        arr = np.zeros((4, 4), dtype=np.uint8)
        arr[1, 2] = 128
        arr[0, 0] = 127
        _write_png(tmp_path / "m.png", arr, "L")
        mask = load_mask(tmp_path / "m.png")
        assert mask[1, 2] == 1
        assert mask[0, 0] == 0
        assert mask.sum() == 1

    def test_logical_01_storage_accepted(self, tmp_path):
        # corpora sometimes store masks as 0/1 rather than 0/255
        arr = np.array([[0, 1], [1, 1]], dtype=np.uint8)
        _write_png(tmp_path / "m.png", arr, "L")
        assert np.array_equal(load_mask(tmp_path / "m.png"), arr)

    def test_three_channel_strict_raises(self, tmp_path):
        arr = np.zeros((4, 4, 3), dtype=np.uint8)
        _write_png(tmp_path / "m.png", arr, "RGB")
        with pytest.raises(DecodeError):
            load_mask(tmp_path / "m.png")

    def test_three_channel_collapse(self, tmp_path):
        arr = np.zeros((4, 4, 3), dtype=np.uint8)
        arr[2, 2] = (255, 255, 255)
        _write_png(tmp_path / "m.png", arr, "RGB")
        mask = load_mask(tmp_path / "m.png", channels="collapse")
        assert mask[2, 2] == 1 and mask.sum() == 1

    def test_save_load_roundtrip_is_canonical(self, tmp_path):
        rng = np.random.default_rng(3)
        mask = (rng.random((33, 17)) < 0.4).astype(np.uint8)
        save_mask(mask, tmp_path / "m.png")
        again = load_mask(tmp_path / "m.png")
        assert np.array_equal(mask, again)
        # canonical form on disk: exactly 0 and 255
        raw = np.asarray(Image.open(tmp_path / "m.png"))
        assert set(np.unique(raw)) <= {0, 255}
        save_mask(again, tmp_path / "m2.png")
        assert (tmp_path / "m.png").read_bytes() == (tmp_path / "m2.png").read_bytes()


class TestNormalize:
    def test_corner_values(self):
        arr = np.array([[[0, 128, 255]]], dtype=np.uint8)
        out = normalize(arr)
        assert out[0, 0, 0] == 0.0
        assert out[0, 0, 1] == 0.5
        # division is by 256, per the data-prep convention
        assert out[0, 0, 2] == 255 / 256 == 0.99609375

    def test_range_strictly_below_one(self, rng):
        arr = rng.integers(0, 256, (8, 8, 3), dtype=np.uint8)
        out = normalize(arr)
        assert out.min() >= 0.0 and out.max() < 1.0


class TestResizeMaskNearest:
    def test_constant_mask(self):
        mask = np.ones((128, 128), dtype=np.uint8)
        out = resize_mask_nearest(mask, 1024, 1024)
        assert out.shape == (1024, 1024)
        assert out.all()

    def test_integer_upscale_replicates_blocks(self):
        mask = np.array([[1, 0], [0, 0]], dtype=np.uint8)
        out = resize_mask_nearest(mask, 4, 4)
        expected = np.zeros((4, 4), dtype=np.uint8)
        expected[:2, :2] = 1
        assert np.array_equal(out, expected)

    def test_single_pixel_maps_to_anchored_block(self):
        # oracle: explicit nearest-neighbor index map
        mask = np.zeros((128, 128), dtype=np.uint8)
        mask[10, 10] = 1
        out = resize_mask_nearest(mask, 1024, 1024)
        src = np.floor((np.arange(1024) + 0.5) * (128 / 1024)).astype(int)
        expected = mask[np.ix_(src, src)]
        assert np.array_equal(out, expected)
        ys, xs = np.nonzero(out)
        assert ys.min() == 80 and ys.max() == 87
        assert xs.min() == 80 and xs.max() == 87
        assert out.sum() == 64

    def test_idempotent_at_same_size(self, rng):
        mask = (rng.random((19, 23)) < 0.5).astype(np.uint8)
        assert np.array_equal(resize_mask_nearest(mask, 23, 19), mask)

    def test_output_stays_binary_on_downscale(self, rng):
        mask = (rng.random((64, 64)) < 0.5).astype(np.uint8)
        out = resize_mask_nearest(mask, 17, 13)
        assert set(np.unique(out)) <= {0, 1}

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError):
            resize_mask_nearest(np.ones((4, 4), dtype=np.uint8), 0, 4)


class TestConnectedComponents:
    def test_empty_mask(self):
        comp = connected_components(np.zeros((5, 5), dtype=np.uint8))
        assert comp.n_components == 0
        assert comp.component_areas == {}

    def test_diagonal_connectivity(self):
        mask = np.zeros((4, 4), dtype=np.uint8)
        mask[0, 0] = 1
        mask[1, 1] = 1
        assert connected_components(mask, connectivity=4).n_components == 2
        assert connected_components(mask, connectivity=8).n_components == 1

    def test_hand_counted_areas(self):
        mask = np.zeros((5, 5), dtype=np.uint8)
        mask[0:2, 0:2] = 1
        mask[4, 4] = 1
        comp = connected_components(mask, connectivity=4)
        assert sorted(comp.component_areas.values()) == [1, 4]

    def test_ids_in_raster_order(self):
        mask = np.zeros((3, 7), dtype=np.uint8)
        mask[0, 5] = 1  # first in raster order
        mask[1, 0] = 1
        mask[2, 3] = 1
        comp = connected_components(mask)
        assert comp.labels[0, 5] == 1
        assert comp.labels[1, 0] == 2
        assert comp.labels[2, 3] == 3

    def test_area_sum_equals_set_pixels(self, rng):
        for _ in range(20):
            mask = (rng.random((16, 16)) < 0.35).astype(np.uint8)
            for conn in (4, 8):
                comp = connected_components(mask, connectivity=conn)
                assert sum(comp.component_areas.values()) == int(mask.sum())

    def test_translation_leaves_area_multiset_unchanged(self, rng):
        mask = (rng.random((12, 12)) < 0.3).astype(np.uint8)
        shifted = np.zeros((20, 20), dtype=np.uint8)
        shifted[5:17, 6:18] = mask
        base = np.zeros((20, 20), dtype=np.uint8)
        base[0:12, 0:12] = mask
        a = connected_components(base, 8).component_areas
        b = connected_components(shifted, 8).component_areas
        assert sorted(a.values()) == sorted(b.values())


class TestLabelsPgm:
    def test_roundtrip(self, tmp_path, rng):
        labels = rng.integers(0, 700, (9, 13)).astype(np.int32)
        save_labels_pgm(labels, tmp_path / "l.pgm")
        assert np.array_equal(load_labels_pgm(tmp_path / "l.pgm"), labels)

    def test_16bit_header(self, tmp_path):
        save_labels_pgm(np.zeros((2, 2), dtype=np.int32), tmp_path / "l.pgm")
        head = (tmp_path / "l.pgm").read_bytes()[:20]
        assert head.startswith(b"P5\n2 2\n65535\n")
