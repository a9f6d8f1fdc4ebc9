"""49-point landmark model and the face-alignment mathematics.

Landmark indices follow the 49-point convention: P1-P10 eyebrows (P5/P6
the inner ends), P11-P19 nose, P20-P31 eyes (P23/P26 the inner corners),
P32-P49 mouth (P35 the top-center of the upper lip). Indices here are
1-based to match that convention; `LandmarkSet.point(i)` takes 1..49.

Alignment removes in-plane rotation (measured between the P35->P50 line
and the image vertical, P50 being the mid-point between the inner
eyebrow ends) and normalizes scale so the inner-eye distance P23-P26
matches a reference value. Both are applied about P35 in a single warp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLandmarks, DimensionMismatch, ExtremeScale
from .imgcore import SCALE_RANGE, Image, warp_rotate_scale

N_POINTS = 49

# 1-based indices of the named anchor points.
INNER_BROW_LEFT = 5
INNER_BROW_RIGHT = 6
INNER_EYE_LEFT = 23
INNER_EYE_RIGHT = 26
MOUTH_TOP = 35


class LandmarkSet:
    """Ordered 49 (x, y) points in pixel coordinates."""

    __slots__ = ("points",)

    def __init__(self, points: np.ndarray):
        arr = np.asarray(points, dtype=np.float64)
        if arr.shape != (N_POINTS, 2):
            raise ValueError(f"expected {N_POINTS} (x, y) points, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("landmark coordinates must be finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    def __setattr__(self, name, value):
        raise AttributeError("LandmarkSet is immutable")

    def point(self, index: int) -> np.ndarray:
        """Return P<index> with the conventional 1-based index."""
        if not 1 <= index <= N_POINTS:
            raise IndexError(f"landmark index {index} outside 1..{N_POINTS}")
        return self.points[index - 1]

    def __eq__(self, other) -> bool:
        return isinstance(other, LandmarkSet) and np.array_equal(self.points, other.points)


@dataclass(frozen=True)
class AlignmentResult:
    """Aligned texture/depth pair with the transform that produced it."""

    texture: Image
    depth: Image
    landmarks: LandmarkSet
    applied_angle: float  # rotation applied to the images, radians
    applied_scale: float


def midpoint_brow(lms: LandmarkSet) -> np.ndarray:
    """P50: the point halfway between the inner eyebrow ends P5 and P6."""
    return 0.5 * (lms.point(INNER_BROW_LEFT) + lms.point(INNER_BROW_RIGHT))


def rotation_angle(lms: LandmarkSet) -> float:
    """Signed angle between the P35->P50 line and the image vertical.

    Magnitude is arccos(l1.l2 / (|l1||l2|)) with l1 = P50 - P35 and
    l2 = (0, y50 - y35); the sign is that of x50 - x35, so rotating the
    landmarks by the negated result about P35 removes the tilt.
    """
    p50 = midpoint_brow(lms)
    p35 = lms.point(MOUTH_TOP)
    l1 = p50 - p35
    l2 = np.array([0.0, l1[1]])
    n1 = np.linalg.norm(l1)
    n2 = np.linalg.norm(l2)
    if n1 == 0.0 or n2 == 0.0:
        raise DegenerateLandmarks("P50 and P35 give a zero-length reference line")
    cosine = np.clip(np.dot(l1, l2) / (n1 * n2), -1.0, 1.0)
    return math.copysign(math.acos(cosine), l1[0])


def interocular_distance(lms: LandmarkSet) -> float:
    """Euclidean distance between the inner eye corners P23 and P26."""
    return float(np.linalg.norm(lms.point(INNER_EYE_RIGHT) - lms.point(INNER_EYE_LEFT)))


def transform_landmarks(lms: LandmarkSet, center, angle: float,
                        factor: float) -> LandmarkSet:
    """Apply p -> c + factor * R(angle) (p - c) to every point, exactly.

    The same forward map warp_rotate_scale applies to pixels, so marker
    pixels and landmarks stay in register.
    """
    if factor <= 0:
        raise ValueError("factor must be positive")
    c = np.asarray(center, dtype=np.float64)
    ca, sa = math.cos(angle), math.sin(angle)
    rot = np.array([[ca, -sa], [sa, ca]])
    return LandmarkSet(c + factor * (lms.points - c) @ rot.T)


def align_face(texture: Image, depth: Image, lms: LandmarkSet,
               ref_dist: float) -> AlignmentResult:
    """Rotate to zero tilt and scale to the reference inner-eye distance.

    Rotation by the negated measured angle and scaling by
    ref_dist / interocular_distance are composed about P35 into one warp,
    applied identically to texture, depth and landmarks.
    """
    if (texture.height, texture.width) != (depth.height, depth.width):
        raise DimensionMismatch(
            f"texture {texture.height}x{texture.width} vs depth "
            f"{depth.height}x{depth.width}")
    if ref_dist <= 0:
        raise ValueError("ref_dist must be positive")
    angle = -rotation_angle(lms)
    dist = interocular_distance(lms)
    if dist == 0.0:
        raise DegenerateLandmarks("inner eye corners coincide")
    factor = ref_dist / dist
    if not (SCALE_RANGE[0] < factor < SCALE_RANGE[1]):
        raise ExtremeScale(f"alignment scale {factor:.4g} outside {SCALE_RANGE}")
    center = tuple(lms.point(MOUTH_TOP))
    return AlignmentResult(
        texture=warp_rotate_scale(texture, center, angle, factor),
        depth=warp_rotate_scale(depth, center, angle, factor),
        landmarks=transform_landmarks(lms, center, angle, factor),
        applied_angle=angle,
        applied_scale=factor,
    )


# ---------------------------------------------------------------------------
# Landmark text files: 49 lines of "x y", '#' comments and blanks ignored.

def write_landmarks(path, lms: LandmarkSet) -> None:
    lines = [f"{float(x)!r} {float(y)!r}" for x, y in lms.points]
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def read_landmarks(path) -> LandmarkSet:
    pts = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            fields = body.split()
            if len(fields) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'x y', got {body!r}")
            pts.append((float(fields[0]), float(fields[1])))
    if len(pts) != N_POINTS:
        raise ValueError(f"{path}: expected {N_POINTS} landmarks, found {len(pts)}")
    return LandmarkSet(np.asarray(pts))
