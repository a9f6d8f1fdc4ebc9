import numpy as np
import pytest

from faceparts.errors import DegenerateLandmarks, DimensionMismatch, ExtremeScale
from faceparts.imgcore import Image, rotate_about
from faceparts.landmarks import (LandmarkSet, align_face, interocular_distance,
                                 midpoint_brow, read_landmarks, rotation_angle,
                                 transform_landmarks, write_landmarks)
from faceparts.synth import canonical_landmarks


def make_lms(overrides=None):
    pts = canonical_landmarks().copy()
    for idx, xy in (overrides or {}).items():
        pts[idx - 1] = xy
    return LandmarkSet(pts)


def smooth_face_image(channels=3):
    yy, xx = np.mgrid[0:128, 0:128] / 127.0
    base = 0.25 + 0.4 * xx * yy + 0.2 * np.sin(xx * 5) * np.cos(yy * 4) ** 2
    arr = np.clip(base, 0, 1)[:, :, None]
    if channels == 3:
        arr = np.repeat(arr, 3, axis=2)
    return Image(arr)


class TestMidpointBrow:
    def test_horizontal_pair(self):
        lms = make_lms({5: (10, 20), 6: (30, 20)})
        assert np.allclose(midpoint_brow(lms), (20, 20))

    def test_coincident(self):
        lms = make_lms({5: (15, 12), 6: (15, 12)})
        assert np.allclose(midpoint_brow(lms), (15, 12))

    def test_mean(self):
        lms = make_lms({5: (0, 0), 6: (4, 6)})
        assert np.allclose(midpoint_brow(lms), (2, 3))


class TestRotationAngle:
    def test_upright_is_zero(self):
        # canonical layout: P50 directly above P35
        assert rotation_angle(make_lms()) == 0.0

    def test_hand_evaluated_quarter_pi(self):
        # P35=(50,80), P50=(60,70): l1=(10,-10), l2=(0,-10)
        # cos a = 100 / (sqrt(200) * 10) = 1/sqrt(2); sign of x50-x35 is +
        lms = make_lms({5: (60, 70), 6: (60, 70), 35: (50, 80)})
        assert rotation_angle(lms) == pytest.approx(np.pi / 4, abs=1e-12)

    def test_recovers_known_rotation_with_sign(self):
        lms = make_lms()
        p35 = tuple(lms.point(35))
        for theta in (0.2, -0.2):
            rotated = transform_landmarks(lms, p35, theta, 1.0)
            assert rotation_angle(rotated) == pytest.approx(theta, abs=1e-9)
            # correction convention: rotating by the negated angle zeroes it
            fixed = transform_landmarks(rotated, p35, -rotation_angle(rotated), 1.0)
            assert abs(rotation_angle(fixed)) <= 1e-9

    def test_degenerate(self):
        lms = make_lms({5: (50, 80), 6: (50, 80), 35: (50, 80)})
        with pytest.raises(DegenerateLandmarks):
            rotation_angle(lms)


class TestInterocular:
    def test_3_4_5_triangle(self):
        lms = make_lms({23: (100, 100), 26: (140, 130)})
        assert interocular_distance(lms) == pytest.approx(50.0)

    def test_zero(self):
        lms = make_lms({23: (10, 10), 26: (10, 10)})
        assert interocular_distance(lms) == 0.0

    def test_unit(self):
        lms = make_lms({23: (0, 0), 26: (1, 0)})
        assert interocular_distance(lms) == pytest.approx(1.0)


class TestTransformLandmarks:
    def test_identity(self):
        lms = make_lms()
        out = transform_landmarks(lms, (10, 10), 0.0, 1.0)
        assert np.allclose(out.points, lms.points)

    def test_center_fixed_point(self):
        lms = make_lms({1: (7, 9)})
        out = transform_landmarks(lms, (7, 9), 1.1, 2.5)
        assert np.allclose(out.point(1), (7, 9))

    def test_scaling_definition(self):
        lms = make_lms({1: (10, 4)})
        out = transform_landmarks(lms, (4, 4), 0.0, 2.0)
        assert np.allclose(out.point(1), (4 + 2 * (10 - 4), 4))

    def test_matches_image_rotation_convention(self):
        # a marker pixel and a landmark at the same spot must land together
        arr = np.zeros((64, 64, 1))
        arr[20, 40, 0] = 1.0
        img = rotate_about(Image(arr), (32, 32), np.pi / 2)
        lm = transform_landmarks(make_lms({1: (40, 20)}), (32, 32), np.pi / 2, 1.0)
        x, y = lm.point(1)
        assert img.data[int(round(y)), int(round(x)), 0] == pytest.approx(1.0, abs=1e-9)


class TestAlignFace:
    def test_already_aligned_is_identity(self):
        lms = make_lms()
        tex = smooth_face_image(3)
        dep = smooth_face_image(1)
        ref = interocular_distance(lms)
        res = align_face(tex, dep, lms, ref)
        assert res.applied_angle == 0.0
        assert res.applied_scale == pytest.approx(1.0)
        assert np.array_equal(res.texture.data, tex.data)
        assert np.array_equal(res.depth.data, dep.data)

    def test_double_distance_halves_scale(self):
        lms = make_lms()
        ref = interocular_distance(lms) / 2.0
        res = align_face(smooth_face_image(3), smooth_face_image(1), lms, ref)
        assert res.applied_scale == pytest.approx(0.5)

    def test_recovers_canonical_landmarks(self):
        lms = make_lms()
        ref = interocular_distance(lms)
        p35 = tuple(lms.point(35))
        perturbed = transform_landmarks(lms, p35, 0.3, 1.4)
        tex = rotate_about(smooth_face_image(3), p35, 0.3)
        res = align_face(tex, smooth_face_image(1), perturbed, ref)
        assert np.max(np.abs(res.landmarks.points - lms.points)) < 0.5
        assert abs(rotation_angle(res.landmarks)) <= 1e-3
        assert interocular_distance(res.landmarks) == pytest.approx(ref, abs=0.5)

    def test_idempotent(self):
        lms = make_lms()
        p35 = tuple(lms.point(35))
        perturbed = transform_landmarks(lms, p35, -0.25, 0.9)
        res = align_face(smooth_face_image(3), smooth_face_image(1), perturbed, 22.0)
        again = align_face(res.texture, res.depth, res.landmarks, 22.0)
        assert abs(again.applied_angle) <= 1e-3
        assert again.applied_scale == pytest.approx(1.0, abs=0.01)

    def test_marker_consistency_across_modalities(self):
        # identical marker coordinate in texture and depth stays identical
        lms = transform_landmarks(make_lms(), (64, 81), 0.2, 1.2)
        tex_arr = np.full((128, 128, 3), 0.2)
        dep_arr = np.full((128, 128, 1), 0.2)
        tex_arr[30, 90] = 1.0
        dep_arr[30, 90] = 1.0
        res = align_face(Image(tex_arr), Image(dep_arr), lms, 25.0)
        diff = np.abs(res.texture.data.mean(axis=2) - res.depth.data[:, :, 0])
        assert diff.max() < 0.05

    def test_errors(self):
        lms = make_lms()
        tex = smooth_face_image(3)
        with pytest.raises(DimensionMismatch):
            align_face(tex, Image(np.zeros((64, 64, 1))), lms, 22.0)
        with pytest.raises(ExtremeScale):
            align_face(tex, smooth_face_image(1), lms, 0.5)  # scale < 0.1


class TestLandmarkIO:
    def test_round_trip(self, tmp_path):
        lms = transform_landmarks(make_lms(), (5, 5), 0.123, 1.456)
        path = tmp_path / "lms.txt"
        write_landmarks(path, lms)
        assert read_landmarks(path) == lms

    def test_comments_and_blanks_ignored(self, tmp_path):
        lms = make_lms()
        path = tmp_path / "lms.txt"
        body = "# header\n\n" + "\n".join(
            f"{float(x)!r} {float(y)!r}  # point" for x, y in lms.points) + "\n"
        path.write_text(body)
        assert read_landmarks(path) == lms

    def test_wrong_count_rejected(self, tmp_path):
        path = tmp_path / "short.txt"
        path.write_text("1 2\n3 4\n")
        with pytest.raises(ValueError):
            read_landmarks(path)
