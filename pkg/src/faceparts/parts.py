"""Facial-part bounding boxes and normalized 64x64 part crops.

Each part is one padded axis-aligned box over its landmark range,
spanning both left and right instances for eyebrows and eyes. Boxes are
computed once per sample on the aligned landmarks and applied to both
modalities so the texture/depth correspondence survives cropping.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import DimensionMismatch
from .imgcore import BBox, Image, crop, resize
from .landmarks import LandmarkSet

PART_SIZE = 64


class PartKind(Enum):
    """The four facial parts, in the fixed concatenation order."""

    EYEBROWS = "eyebrows"
    EYES = "eyes"
    NOSE = "nose"
    MOUTH = "mouth"


PART_ORDER = (PartKind.EYEBROWS, PartKind.EYES, PartKind.NOSE, PartKind.MOUTH)

# 1-based inclusive landmark ranges per part under the 49-point layout.
PART_LANDMARKS: dict[PartKind, tuple[int, int]] = {
    PartKind.EYEBROWS: (1, 10),
    PartKind.EYES: (20, 31),
    PartKind.NOSE: (11, 19),
    PartKind.MOUTH: (32, 49),
}


@dataclass(frozen=True)
class PartSet:
    """The four 64x64 crops of one sample/modality plus their source boxes."""

    crops: dict[PartKind, Image]
    source_bboxes: dict[PartKind, BBox]

    def __post_init__(self):
        for kind in PART_ORDER:
            img = self.crops[kind]
            if (img.height, img.width) != (PART_SIZE, PART_SIZE):
                raise ValueError(f"{kind.value} crop is {img.height}x{img.width}, "
                                 f"expected {PART_SIZE}x{PART_SIZE}")


def part_bbox(lms: LandmarkSet, kind: PartKind, pad: float = 7.0) -> BBox:
    """Tight box over the part's landmarks, expanded by `pad` on each side.

    Clamping to image bounds happens at crop time, not here.
    """
    if not 0 <= pad <= 32:
        raise ValueError(f"pad {pad} outside [0, 32]")
    lo, hi = PART_LANDMARKS[kind]
    pts = lms.points[lo - 1:hi]
    x_min, y_min = pts.min(axis=0)
    x_max, y_max = pts.max(axis=0)
    return BBox(x_min - pad, y_min - pad, x_max + pad, y_max + pad)


def extract_parts(texture: Image, depth: Image, lms: LandmarkSet,
                  pad: float = 7.0) -> tuple[PartSet, PartSet]:
    """Crop and resize all four parts from both modalities.

    The same source box (clamped to the shared image bounds) is applied
    to texture and depth; each crop is resized to 64x64 regardless of
    aspect ratio.
    """
    if (texture.height, texture.width) != (depth.height, depth.width):
        raise DimensionMismatch("texture and depth dimensions differ")
    tex_crops: dict[PartKind, Image] = {}
    dep_crops: dict[PartKind, Image] = {}
    boxes: dict[PartKind, BBox] = {}
    for kind in PART_ORDER:
        box = part_bbox(lms, kind, pad).clamped(texture.width, texture.height)
        boxes[kind] = box
        tex_crops[kind] = resize(crop(texture, box), PART_SIZE, PART_SIZE)
        dep_crops[kind] = resize(crop(depth, box), PART_SIZE, PART_SIZE)
    return (PartSet(tex_crops, boxes), PartSet(dep_crops, dict(boxes)))
