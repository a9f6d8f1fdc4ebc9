import numpy as np
import pytest

from faceparts.errors import BadDimensions, EmptyRegion, NonPositiveFactor
from faceparts.imgcore import (BBox, Image, bilinear_sample, crop, hflip,
                               read_pnm, resize, rotate_about, scale_about,
                               write_pnm)


def gray(arr):
    return Image(np.asarray(arr, dtype=np.float64)[:, :, None])


def smooth_gradient(h, w):
    yy, xx = np.mgrid[0:h, 0:w]
    return gray(0.2 + 0.5 * (xx / (w - 1)) * (yy / (h - 1)))


class TestImage:
    def test_clamps_and_validates(self):
        img = Image(np.array([[[1.5], [-0.2]]]))
        assert img.data.max() <= 1.0 and img.data.min() >= 0.0
        with pytest.raises(ValueError):
            Image(np.array([[[np.nan]]]))
        with pytest.raises(BadDimensions):
            Image(np.zeros((4, 4, 2)))

    def test_immutable(self):
        img = gray(np.zeros((2, 2)))
        with pytest.raises((AttributeError, ValueError)):
            img.data[0, 0, 0] = 1.0


class TestBilinearSample:
    def test_integer_pixel_is_exact(self):
        rng = np.random.default_rng(0)
        img = gray(rng.random((8, 8)))
        assert bilinear_sample(img, 3, 5)[0] == img.data[5, 3, 0]

    def test_midpoint_between_pixels(self):
        arr = np.zeros((2, 4))
        arr[:, 2] = 1.0  # columns constant; midpoint of 0.0 and 1.0
        assert bilinear_sample(gray(arr), 1.5, 0.5)[0] == pytest.approx(0.5)

    def test_out_of_bounds_is_fill(self):
        img = gray(np.ones((4, 4)))
        assert bilinear_sample(img, -1, -1)[0] == 0.0
        assert bilinear_sample(img, 10, 2)[0] == 0.0


class TestRotate:
    def test_zero_angle_identity(self):
        img = smooth_gradient(9, 7)
        out = rotate_about(img, (3, 4), 0.0)
        assert np.array_equal(out.data, img.data)

    def test_quarter_turn_moves_pixel_to_hand_computed_position(self):
        # Bright pixel at (x=3, y=1); rotate pi/2 about the image center
        # (1.5, 1.5). Forward map: p' = c + R(pi/2) (p - c) with
        # R = [[0, -1], [1, 0]], so (3, 1) -> c + R(1.5, -0.5) = (2, 3).
        arr = np.zeros((4, 4))
        arr[1, 3] = 1.0
        out = rotate_about(gray(arr), (1.5, 1.5), np.pi / 2)
        assert out.data[3, 2, 0] == pytest.approx(1.0, abs=1e-9)
        assert out.data[1, 3, 0] == pytest.approx(0.0, abs=1e-9)

    def test_round_trip_interior_error_bounded(self):
        # Interior = a disk about the center: rotation-invariant, so those
        # pixels never sample the fill wedge and only interpolation loss
        # remains (>= 2 px clear of every border by construction).
        img = smooth_gradient(32, 32)
        back = rotate_about(rotate_about(img, (15.5, 15.5), 0.4), (15.5, 15.5), -0.4)
        yy, xx = np.mgrid[0:32, 0:32]
        disk = (xx - 15.5) ** 2 + (yy - 15.5) ** 2 <= 13.0 ** 2
        assert np.max(np.abs(back.data[disk] - img.data[disk])) < 0.05

    def test_preserves_dimensions(self):
        img = smooth_gradient(10, 20)
        out = rotate_about(img, (5, 5), 1.0)
        assert (out.height, out.width, out.channels) == (10, 20, 1)


class TestScale:
    def test_factor_one_identity(self):
        img = smooth_gradient(8, 8)
        assert np.array_equal(scale_about(img, (2, 2), 1.0).data, img.data)

    def test_center_pixel_is_fixed_point(self):
        arr = np.zeros((9, 9))
        arr[4, 6] = 1.0
        out = scale_about(gray(arr), (6, 4), 2.0)
        assert out.data[4, 6, 0] == pytest.approx(1.0, abs=1e-9)

    def test_rejects_bad_factors(self):
        img = gray(np.zeros((4, 4)))
        for factor in (0.0, -1.0, 0.05, 12.0):
            with pytest.raises(NonPositiveFactor):
                scale_about(img, (2, 2), factor)

    def test_constant_fixed_point_away_from_borders(self):
        img = gray(np.full((16, 16), 0.7))
        out = scale_about(img, (7.5, 7.5), 1.3)
        assert np.allclose(out.data[4:-4, 4:-4], 0.7, atol=1e-6)


class TestCrop:
    def test_full_image(self):
        img = smooth_gradient(5, 6)
        out = crop(img, BBox(0, 0, 6, 5))
        assert np.array_equal(out.data, img.data)

    def test_2x2_exact_copy(self):
        rng = np.random.default_rng(1)
        img = gray(rng.random((4, 4)))
        out = crop(img, BBox(1, 2, 3, 4))
        assert np.array_equal(out.data, img.data[2:4, 1:3])

    def test_clamps_right_edge(self):
        img = smooth_gradient(6, 8)
        out = crop(img, BBox(2, 0, 11, 6))  # exceeds right edge by 3
        assert out.width == 8 - 2

    def test_empty_region(self):
        img = smooth_gradient(4, 4)
        with pytest.raises(EmptyRegion):
            crop(img, BBox(10, 10, 12, 12))


class TestResize:
    def test_same_size_identity(self):
        img = smooth_gradient(7, 5)
        out = resize(img, 5, 7)
        assert np.allclose(out.data, img.data, atol=1e-6)

    def test_constant_stays_constant(self):
        img = gray(np.full((17, 23), 0.7))
        out = resize(img, 64, 64)
        assert np.allclose(out.data, 0.7, atol=1e-6)

    def test_linear_ramp_upsample(self):
        w = 32
        ramp = np.tile(np.linspace(0.1, 0.9, w), (4, 1))
        out = resize(gray(ramp), 2 * w, 4)
        # analytic: value at dst x is linear in the source coordinate
        xs = (np.arange(2 * w) + 0.5) * (w / (2 * w)) - 0.5
        expected = 0.1 + (0.9 - 0.1) * np.clip(xs, 0, w - 1) / (w - 1)
        assert np.allclose(out.data[2, 2:-2, 0], expected[2:-2], atol=1e-3)

    def test_rejects_degenerate_target(self):
        with pytest.raises(BadDimensions):
            resize(smooth_gradient(4, 4), 0, 4)


class TestHflip:
    def test_involution(self):
        img = smooth_gradient(6, 9)
        assert hflip(hflip(img)) == img

    def test_row_reversal(self):
        img = gray([[0.1, 0.5, 0.9]])
        assert np.allclose(hflip(img).data[0, :, 0], [0.9, 0.5, 0.1])

    def test_symmetric_unchanged(self):
        img = gray([[0.2, 0.7, 0.2], [0.4, 0.1, 0.4]])
        assert hflip(img) == img


class TestProperties:
    def test_outputs_stay_in_unit_interval(self):
        rng = np.random.default_rng(3)
        img = gray(rng.random((20, 20)))
        for out in (rotate_about(img, (9, 9), 0.7),
                    scale_about(img, (9, 9), 1.7),
                    resize(img, 13, 29), hflip(img)):
            assert np.all(np.isfinite(out.data))
            assert out.data.min() >= 0.0 and out.data.max() <= 1.0


class TestPnmIO:
    def test_round_trip_gray_and_rgb(self, tmp_path):
        rng = np.random.default_rng(4)
        quantized = np.round(rng.random((9, 7)) * 255) / 255
        img = gray(quantized)
        path = tmp_path / "g.pgm"
        write_pnm(path, img)
        assert read_pnm(path) == img

        rgb = Image(np.round(rng.random((5, 6, 3)) * 255) / 255)
        path = tmp_path / "c.ppm"
        write_pnm(path, rgb)
        assert read_pnm(path) == rgb

    def test_rejects_bad_magic(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P3\n1 1\n255\n0")
        with pytest.raises(ValueError):
            read_pnm(path)

    def test_rejects_truncated(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n4 4\n255\n\x00\x01")
        with pytest.raises(ValueError):
            read_pnm(path)
