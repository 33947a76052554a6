import numpy as np
import pytest
from PIL import Image

from netgrab.errors import DecodeError
from netgrab.raster import (
    BinaryImage,
    GrayImage,
    RgbImage,
    connected_components,
    distance_transform,
    load_png,
    save_png,
)


def flood_fill_partition(fg, connectivity):
    """Oracle: per-pixel BFS flood fill, returns a label array (values arbitrary)."""
    h, w = fg.shape
    if connectivity == 8:
        nbrs = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    else:
        nbrs = [(-1, 0), (0, -1), (0, 1), (1, 0)]
    labels = np.zeros((h, w), dtype=int)
    nxt = 0
    for sy in range(h):
        for sx in range(w):
            if not fg[sy, sx] or labels[sy, sx]:
                continue
            nxt += 1
            stack = [(sy, sx)]
            labels[sy, sx] = nxt
            while stack:
                y, x = stack.pop()
                for dy, dx in nbrs:
                    ny, nx_ = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx_ < w and fg[ny, nx_] and not labels[ny, nx_]:
                        labels[ny, nx_] = nxt
                        stack.append((ny, nx_))
    return labels, nxt


def brute_force_edt(fg):
    h, w = fg.shape
    out = np.zeros((h, w), dtype=np.int64)
    bg = np.argwhere(~fg)
    for y in range(h):
        for x in range(w):
            if fg[y, x]:
                out[y, x] = ((bg[:, 0] - y) ** 2 + (bg[:, 1] - x) ** 2).min()
    return out


class TestPngIo:
    def test_rgb_round_trip_identity(self, tmp_path):
        rgb = RgbImage(np.array([[[255, 0, 0]]], dtype=np.uint8))
        path = tmp_path / "one.png"
        save_png(rgb, path)
        back = load_png(path)
        assert np.array_equal(back.pixels, rgb.pixels)

    def test_grayscale_png_replicates_channels(self, tmp_path):
        path = tmp_path / "gray.png"
        Image.fromarray(np.array([[128]], dtype=np.uint8), mode="L").save(path)
        img = load_png(path)
        assert img.pixels[0, 0].tolist() == [128, 128, 128]

    def test_alpha_composites_over_white(self, tmp_path):
        path = tmp_path / "rgba.png"
        rgba = np.zeros((1, 1, 4), dtype=np.uint8)  # fully transparent black
        Image.fromarray(rgba, mode="RGBA").save(path)
        img = load_png(path)
        assert img.pixels[0, 0].tolist() == [255, 255, 255]

    def test_palette_png_converts(self, tmp_path):
        path = tmp_path / "pal.png"
        pil = Image.fromarray(np.array([[3, 200]], dtype=np.uint8), mode="L")
        pil.convert("P").save(path)
        img = load_png(path)
        assert img.pixels.shape == (1, 2, 3)

    def test_binary_encodes_255(self, tmp_path):
        mask = np.zeros((3, 4), dtype=bool)
        mask[1, 2] = True
        path = tmp_path / "bin.png"
        save_png(BinaryImage(mask), path)
        raw = np.asarray(Image.open(path))
        assert raw[1, 2] == 255
        assert raw.sum() == 255

    def test_gray_round_trip_random(self, tmp_path):
        rng = np.random.default_rng(1)
        gray = GrayImage(rng.integers(0, 256, (64, 64), dtype=np.uint8))
        path = tmp_path / "g.png"
        save_png(gray, path)
        assert np.array_equal(load_png(path).pixels[..., 0], gray.pixels)

    def test_rgb_round_trip_random(self, tmp_path):
        rng = np.random.default_rng(2)
        rgb = RgbImage(rng.integers(0, 256, (32, 48, 3), dtype=np.uint8))
        path = tmp_path / "c.png"
        save_png(rgb, path)
        assert np.array_equal(load_png(path).pixels, rgb.pixels)

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_png(tmp_path / "nope.png")

    def test_corrupt_file_raises_decode_error(self, tmp_path):
        path = tmp_path / "bad.png"
        path.write_bytes(b"\x89PNG\r\n\x1a\n" + b"junk" * 8)
        with pytest.raises(DecodeError):
            load_png(path)

    def test_non_png_raises_decode_error(self, tmp_path):
        path = tmp_path / "actually.bmp"
        Image.fromarray(np.zeros((2, 2), dtype=np.uint8), mode="L").save(
            path, format="BMP"
        )
        with pytest.raises(DecodeError):
            load_png(path)


class TestConnectedComponents:
    def test_empty_image(self):
        img = BinaryImage(np.zeros((5, 5), dtype=bool))
        assert connected_components(img, 8).component_count == 0

    def test_diagonal_pair_connectivity(self):
        m = np.zeros((4, 4), dtype=bool)
        m[1, 1] = m[2, 2] = True
        assert connected_components(BinaryImage(m), 8).component_count == 1
        assert connected_components(BinaryImage(m), 4).component_count == 2

    def test_labels_are_first_encounter_raster_order(self):
        m = np.zeros((3, 5), dtype=bool)
        m[0, 4] = True  # first in raster order
        m[2, 0] = True
        lab = connected_components(BinaryImage(m), 8)
        assert lab.labels[0, 4] == 1
        assert lab.labels[2, 0] == 2

    @pytest.mark.parametrize("connectivity", [4, 8])
    def test_matches_flood_fill_oracle(self, connectivity):
        rng = np.random.default_rng(7)
        for _ in range(20):
            fg = rng.random((32, 32)) < 0.45
            lab = connected_components(BinaryImage(fg), connectivity)
            oracle, count = flood_fill_partition(fg, connectivity)
            assert lab.component_count == count
            # identical partitions: label images must be related by a bijection;
            # first-encounter ordering actually forces exact equality
            assert np.array_equal(lab.labels, oracle)


class TestDistanceTransform:
    def test_adjacent_to_background(self):
        fg = np.zeros((3, 3), dtype=bool)
        fg[1, 1] = True
        field = distance_transform(BinaryImage(fg))
        assert field.sq_dist[1, 1] == 1
        assert field.sq_dist[0, 0] == 0

    def test_five_by_five_corner_background(self):
        fg = np.ones((5, 5), dtype=bool)
        for y, x in [(0, 0), (0, 4), (4, 0), (4, 4)]:
            fg[y, x] = False
        field = distance_transform(BinaryImage(fg))
        assert field.sq_dist[2, 2] == 8

    def test_matches_brute_force(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            fg = rng.random((32, 32)) < 0.8
            field = distance_transform(BinaryImage(fg))
            assert np.array_equal(field.sq_dist, brute_force_edt(fg))

    def test_matches_brute_force_64(self):
        rng = np.random.default_rng(12)
        for _ in range(5):
            fg = rng.random((64, 64)) < 0.9
            field = distance_transform(BinaryImage(fg))
            assert np.array_equal(field.sq_dist, brute_force_edt(fg))

    def test_all_foreground_sentinel(self):
        fg = np.ones((4, 6), dtype=bool)
        field = distance_transform(BinaryImage(fg))
        assert (field.sq_dist == 6 * 6 + 4 * 4).all()

    def test_single_foreground_pixel_inverted(self):
        # distance_transform of the inverted single-pixel image measures the
        # squared distance to that pixel everywhere
        fg = np.zeros((9, 9), dtype=bool)
        fg[4, 4] = True
        field = distance_transform(BinaryImage(~fg))
        ys, xs = np.mgrid[0:9, 0:9]
        expect = (ys - 4) ** 2 + (xs - 4) ** 2
        expect[4, 4] = 0
        assert np.array_equal(field.sq_dist, expect)
