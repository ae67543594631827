import colorsys
import io

import numpy as np
import pytest

from bestbuddies import (
    DimensionError,
    FeatureGrid,
    FormatError,
    load_feature_grid,
    load_image,
    normalize_per_window,
    rgb_to_hsv,
    save_feature_grid,
    save_image,
    save_pgm,
)


def random_grid(rng, h, w, d):
    return FeatureGrid(rng.random((h, w, d), dtype=np.float32))


class TestFeatureGrid:
    def test_properties(self):
        g = FeatureGrid(np.zeros((4, 7, 3), dtype=np.float32))
        assert (g.height, g.width, g.channels) == (4, 7, 3)

    def test_rejects_wrong_ndim(self):
        with pytest.raises(DimensionError):
            FeatureGrid(np.zeros((4, 7), dtype=np.float32))

    def test_rejects_degenerate(self):
        with pytest.raises(DimensionError):
            FeatureGrid(np.zeros((4, 0, 3), dtype=np.float32))

    def test_rejects_non_finite(self):
        data = np.zeros((2, 2, 1), dtype=np.float32)
        data[0, 0, 0] = np.nan
        with pytest.raises(FormatError):
            FeatureGrid(data)

    def test_crop_contents(self):
        rng = np.random.default_rng(0)
        g = random_grid(rng, 10, 12, 3)
        c = g.crop(3, 2, 5, 4)
        assert c.data.shape == (4, 5, 3)
        assert np.array_equal(c.data, g.data[2:6, 3:8])

    def test_crop_out_of_bounds(self):
        g = FeatureGrid(np.zeros((4, 4, 1), dtype=np.float32))
        with pytest.raises(DimensionError):
            g.crop(2, 0, 3, 2)
        with pytest.raises(DimensionError):
            g.crop(-1, 0, 2, 2)


class TestPPM:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        raw = rng.integers(0, 256, size=(6, 9, 3)).astype(np.uint8)
        grid = FeatureGrid(raw.astype(np.float32) / 255.0)
        path = tmp_path / "img.ppm"
        save_image(grid, path)
        back = load_image(path)
        assert np.array_equal(back.data, grid.data)

    def test_header_comments_and_whitespace(self, tmp_path):
        payload = bytes(range(12))
        path = tmp_path / "c.ppm"
        path.write_bytes(b"P6 # fmt\n# a comment line\n 2\t2 # dims\n255\n" + payload)
        grid = load_image(path)
        assert (grid.height, grid.width) == (2, 2)
        expect = np.frombuffer(payload, dtype=np.uint8).reshape(2, 2, 3)
        assert np.array_equal(grid.data, expect.astype(np.float32) / 255.0)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.ppm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes(4))
        with pytest.raises(FormatError):
            load_image(path)

    def test_bad_maxval(self, tmp_path):
        path = tmp_path / "m.ppm"
        path.write_bytes(b"P6\n2 2\n65535\n" + bytes(24))
        with pytest.raises(FormatError):
            load_image(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "t.ppm"
        path.write_bytes(b"P6\n2 2\n255\n" + bytes(5))
        with pytest.raises(FormatError):
            load_image(path)

    def test_save_requires_three_channels(self, tmp_path):
        g = FeatureGrid(np.zeros((2, 2, 1), dtype=np.float32))
        with pytest.raises(DimensionError):
            save_image(g, tmp_path / "x.ppm")


class TestBFM:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(2)
        data = (rng.standard_normal((5, 4, 7)) * 100).astype(np.float32)
        grid = FeatureGrid(data)
        path = tmp_path / "g.bfm"
        save_feature_grid(grid, path)
        back = load_feature_grid(path)
        assert back.data.dtype == np.float32
        assert np.array_equal(
            back.data.view(np.uint32), grid.data.view(np.uint32)
        )

    def test_header_layout(self, tmp_path):
        grid = FeatureGrid(np.zeros((3, 2, 1), dtype=np.float32))
        path = tmp_path / "h.bfm"
        save_feature_grid(grid, path)
        blob = path.read_bytes()
        assert blob[:4] == b"BFM1"
        assert np.array_equal(
            np.frombuffer(blob[4:16], dtype="<u4"), [3, 2, 1]
        )
        assert len(blob) == 16 + 3 * 2 * 1 * 4

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bfm"
        path.write_bytes(b"BFMX" + bytes(16))
        with pytest.raises(FormatError):
            load_feature_grid(path)

    def test_truncated_payload(self, tmp_path):
        grid = FeatureGrid(np.ones((2, 2, 2), dtype=np.float32))
        path = tmp_path / "t.bfm"
        save_feature_grid(grid, path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(FormatError):
            load_feature_grid(path)

    def test_non_finite_payload(self, tmp_path):
        path = tmp_path / "nf.bfm"
        import struct

        payload = struct.pack("<f", float("inf"))
        path.write_bytes(b"BFM1" + struct.pack("<III", 1, 1, 1) + payload)
        with pytest.raises(FormatError):
            load_feature_grid(path)


class TestHSV:
    def test_matches_stdlib_conversion(self):
        rng = np.random.default_rng(3)
        raw = rng.integers(0, 256, size=(8, 8, 3)).astype(np.uint8)
        grid = FeatureGrid(raw.astype(np.float32) / 255.0)
        hsv = rgb_to_hsv(grid)
        for i in range(8):
            for j in range(8):
                r, g, b = (float(v) for v in grid.data[i, j])
                h, s, v = colorsys.rgb_to_hsv(r, g, b)
                assert hsv.data[i, j, 0] == pytest.approx(h, abs=1e-6)
                assert hsv.data[i, j, 1] == pytest.approx(s, abs=1e-6)
                assert hsv.data[i, j, 2] == pytest.approx(v, abs=1e-6)

    def test_achromatic_hue_is_zero(self):
        gray = FeatureGrid(np.full((2, 2, 3), 0.5, dtype=np.float32))
        hsv = rgb_to_hsv(gray)
        assert np.all(hsv.data[..., 0] == 0.0)
        assert np.all(hsv.data[..., 1] == 0.0)
        assert np.allclose(hsv.data[..., 2], 0.5)

    def test_range(self):
        rng = np.random.default_rng(4)
        hsv = rgb_to_hsv(random_grid(rng, 16, 16, 3))
        assert hsv.data.min() >= 0.0
        assert hsv.data.max() <= 1.0

    def test_requires_three_channels(self):
        with pytest.raises(DimensionError):
            rgb_to_hsv(FeatureGrid(np.zeros((2, 2, 2), dtype=np.float32)))


class TestNormalizePerWindow:
    def test_zero_mean_unit_variance(self):
        rng = np.random.default_rng(5)
        out = normalize_per_window(random_grid(rng, 9, 7, 3))
        flat = out.data.reshape(-1, 3).astype(np.float64)
        assert np.allclose(flat.mean(axis=0), 0.0, atol=1e-5)
        assert np.allclose(flat.var(axis=0), 1.0, atol=1e-4)

    def test_constant_channel_zeroed(self):
        data = np.zeros((4, 4, 2), dtype=np.float32)
        data[..., 0] = 0.7
        data[..., 1] = np.arange(16, dtype=np.float32).reshape(4, 4)
        out = normalize_per_window(FeatureGrid(data))
        assert np.all(out.data[..., 0] == 0.0)
        assert out.data[..., 1].std() > 0


class TestPGM:
    def test_constant_map(self, tmp_path):
        path = tmp_path / "c.pgm"
        save_pgm(np.full((3, 5), 2.5), path)
        blob = path.read_bytes()
        assert blob.startswith(b"P5\n5 3\n255\n")
        assert blob[len(b"P5\n5 3\n255\n") :] == bytes(15)

    def test_min_max_scaling(self, tmp_path):
        path = tmp_path / "s.pgm"
        save_pgm(np.array([[0.0, 1.0], [0.5, 0.25]]), path)
        pixels = path.read_bytes()[len(b"P5\n2 2\n255\n") :]
        assert list(pixels) == [0, 255, 128, 64]

    def test_rejects_non_2d(self, tmp_path):
        with pytest.raises(DimensionError):
            save_pgm(np.zeros((2, 2, 2)), tmp_path / "x.pgm")
