import numpy as np
import pytest

from faceparts.errors import EmptyRegion
from faceparts.imgcore import Image
from faceparts.landmarks import LandmarkSet
from faceparts.parts import (PART_LANDMARKS, PART_ORDER, PartKind, extract_parts,
                             part_bbox)
from faceparts.synth import canonical_landmarks


def make_lms(overrides=None):
    pts = canonical_landmarks().copy()
    for idx, xy in (overrides or {}).items():
        pts[idx - 1] = xy
    return LandmarkSet(pts)


class TestPartBbox:
    def test_mouth_min_max_plus_pad(self):
        overrides = {}
        xs = np.linspace(40, 80, 18)
        ys = np.linspace(100, 120, 18)
        for offset, idx in enumerate(range(32, 50)):
            overrides[idx] = (xs[offset], ys[offset])
        box = part_bbox(make_lms(overrides), PartKind.MOUTH, pad=7)
        assert (box.x_min, box.y_min, box.x_max, box.y_max) == (33, 93, 87, 127)

    def test_zero_pad_equals_extremes(self):
        lms = make_lms()
        lo, hi = PART_LANDMARKS[PartKind.EYES]
        pts = lms.points[lo - 1:hi]
        box = part_bbox(lms, PartKind.EYES, pad=0)
        assert box.x_min == pts[:, 0].min() and box.x_max == pts[:, 0].max()
        assert box.y_min == pts[:, 1].min() and box.y_max == pts[:, 1].max()

    def test_coincident_landmarks_pad_box(self):
        overrides = {i: (50, 60) for i in range(11, 20)}  # nose range
        box = part_bbox(make_lms(overrides), PartKind.NOSE, pad=7)
        assert (box.width, box.height) == (14, 14)
        assert (box.x_min + box.x_max) / 2 == 50

    def test_contains_defining_landmarks(self):
        lms = make_lms()
        for kind in PART_ORDER:
            lo, hi = PART_LANDMARKS[kind]
            box = part_bbox(lms, kind, pad=5)
            pts = lms.points[lo - 1:hi]
            assert np.all(pts[:, 0] >= box.x_min) and np.all(pts[:, 0] <= box.x_max)
            assert np.all(pts[:, 1] >= box.y_min) and np.all(pts[:, 1] <= box.y_max)

    def test_pad_range_enforced(self):
        with pytest.raises(ValueError):
            part_bbox(make_lms(), PartKind.EYES, pad=40)


class TestExtractParts:
    def test_identical_content_gives_identical_crops(self):
        rng = np.random.default_rng(0)
        base = rng.random((128, 128, 1))
        tex = Image(np.repeat(base, 3, axis=2))
        dep = Image(base)
        tex_set, dep_set = extract_parts(tex, dep, make_lms(), pad=7)
        for kind in PART_ORDER:
            assert tex_set.source_bboxes[kind] == dep_set.source_bboxes[kind]
            assert np.allclose(tex_set.crops[kind].data[:, :, 0],
                               dep_set.crops[kind].data[:, :, 0])

    def test_constant_images(self):
        tex = Image(np.full((128, 128, 3), 0.5))
        dep = Image(np.full((128, 128, 1), 0.5))
        tex_set, dep_set = extract_parts(tex, dep, make_lms(), pad=7)
        for kind in PART_ORDER:
            assert np.allclose(tex_set.crops[kind].data, 0.5, atol=1e-6)
            assert np.allclose(dep_set.crops[kind].data, 0.5, atol=1e-6)

    def test_marker_at_mouth_box_center_maps_to_crop_center(self):
        lms = make_lms()
        box = part_bbox(lms, PartKind.MOUTH, pad=7).clamped(128, 128)
        cx = int((box.x_min + box.x_max) // 2)
        cy = int((box.y_min + box.y_max) // 2)
        arr = np.zeros((128, 128, 1))
        arr[cy, cx, 0] = 1.0
        tex_set, _ = extract_parts(Image(np.repeat(arr, 3, axis=2)), Image(arr),
                                   lms, pad=7)
        crop = tex_set.crops[PartKind.MOUTH].data[:, :, 0]
        y, x = np.unravel_index(np.argmax(crop), crop.shape)
        assert abs(x - 32) <= 1 and abs(y - 32) <= 1

    def test_output_always_64x64(self):
        lms = make_lms()
        tex = Image(np.zeros((128, 128, 3)))
        dep = Image(np.zeros((128, 128, 1)))
        tex_set, dep_set = extract_parts(tex, dep, lms, pad=0)
        for kind in PART_ORDER:
            assert (tex_set.crops[kind].height, tex_set.crops[kind].width) == (64, 64)
            assert tex_set.crops[kind].channels == 3
            assert dep_set.crops[kind].channels == 1

    def test_off_image_landmarks_raise(self):
        overrides = {i: (-500, -500) for i in range(32, 50)}
        with pytest.raises(EmptyRegion):
            extract_parts(Image(np.zeros((128, 128, 3))),
                          Image(np.zeros((128, 128, 1))),
                          make_lms(overrides), pad=2)
