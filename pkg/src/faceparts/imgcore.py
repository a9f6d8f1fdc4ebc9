"""Image values and the geometric primitives used by every pipeline stage.

Coordinate convention (used by the whole package): x grows rightward
(columns), y grows downward (rows), origin at the top-left pixel, pixel
centers at integer coordinates. A positive rotation angle turns the +x
axis toward the +y axis, i.e. the standard rotation matrix applied in
(x, y) pixel coordinates.

Warps resample via inverse mapping with bilinear interpolation;
coordinates falling outside the image read the fill value FILL_VALUE.
resize() instead clamps source coordinates to the image so constant
images stay constant everywhere, borders included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadDimensions, EmptyRegion, NonPositiveFactor

# Intensity read for coordinates outside the image during warps.
FILL_VALUE = 0.0

# Scale factors outside this open interval are rejected as pathological.
SCALE_RANGE = (0.1, 10.0)


class Image:
    """Immutable H x W x C grid of intensities in [0, 1].

    `data` is float64, shape (height, width, channels) with channels 1
    (depth/grayscale) or 3 (texture). The constructor clamps values into
    [0, 1] and rejects non-finite input.
    """

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise BadDimensions(f"expected (H, W, 1|3) data, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image intensities must be finite")
        arr = np.clip(arr, 0.0, 1.0)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Image is immutable")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def __eq__(self, other) -> bool:
        return isinstance(other, Image) and np.array_equal(self.data, other.data)

    def __repr__(self) -> str:
        return f"Image({self.height}x{self.width}x{self.channels})"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box; max edges are exclusive. Coordinates may be real."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def clamped(self, img_w: int, img_h: int) -> "BBox":
        """Clamp to image bounds and round outward to the pixel grid."""
        x0 = max(0, int(math.floor(self.x_min)))
        y0 = max(0, int(math.floor(self.y_min)))
        x1 = min(img_w, int(math.ceil(self.x_max)))
        y1 = min(img_h, int(math.ceil(self.y_max)))
        if x0 >= x1 or y0 >= y1:
            raise EmptyRegion(f"box {self} clamped to {img_w}x{img_h} image is empty")
        return BBox(x0, y0, x1, y1)


def bilinear_sample(img: Image, x: float, y: float) -> np.ndarray:
    """Bilinear interpolation at (x, y); out-of-bounds reads FILL_VALUE.

    Returns one value per channel.
    """
    return _sample_grid(img.data, np.asarray([x], dtype=np.float64),
                        np.asarray([y], dtype=np.float64), clamp=False)[0]


def _sample_grid(data: np.ndarray, xs: np.ndarray, ys: np.ndarray,
                 clamp: bool) -> np.ndarray:
    """Vectorized bilinear sampling at flat coordinate arrays.

    With clamp=False, coordinates outside [0, W-1] x [0, H-1] blend toward
    FILL_VALUE exactly as if the image were embedded in an infinite fill
    plane. With clamp=True, coordinates are clamped to the valid range
    first (edge replication).
    """
    h, w, c = data.shape
    if clamp:
        xs = np.clip(xs, 0.0, w - 1.0)
        ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = (xs - x0)[:, None]
    fy = (ys - y0)[:, None]

    def tap(ix, iy):
        inside = (ix >= 0) & (ix < w) & (iy >= 0) & (iy < h)
        vals = np.full((ix.shape[0], c), FILL_VALUE, dtype=np.float64)
        ii = np.where(inside)[0]
        vals[ii] = data[iy[ii], ix[ii]]
        return vals

    v00 = tap(x0, y0)
    v10 = tap(x0 + 1, y0)
    v01 = tap(x0, y0 + 1)
    v11 = tap(x0 + 1, y0 + 1)
    top = v00 * (1.0 - fx) + v10 * fx
    bot = v01 * (1.0 - fx) + v11 * fx
    return top * (1.0 - fy) + bot * fy


def _output_grid(w: int, h: int) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:h, 0:w]
    return xs.ravel().astype(np.float64), ys.ravel().astype(np.float64)


def warp_rotate_scale(img: Image, center: tuple[float, float], angle: float,
                      factor: float) -> Image:
    """Rotate by `angle` then scale by `factor` about `center`, one resample.

    Forward point map: p' = c + factor * R(angle) (p - c). Output keeps the
    input dimensions; exposed source coordinates read FILL_VALUE.
    """
    if not math.isfinite(angle):
        raise ValueError("angle must be finite")
    if not (SCALE_RANGE[0] < factor < SCALE_RANGE[1]):
        raise NonPositiveFactor(f"scale factor {factor} outside {SCALE_RANGE}")
    if angle == 0.0 and factor == 1.0:
        return img
    cx, cy = center
    xs, ys = _output_grid(img.width, img.height)
    # Inverse map: p = c + R(-angle) ((p' - c) / factor)
    dx = (xs - cx) / factor
    dy = (ys - cy) / factor
    ca, sa = math.cos(-angle), math.sin(-angle)
    sx = cx + ca * dx - sa * dy
    sy = cy + sa * dx + ca * dy
    out = _sample_grid(img.data, sx, sy, clamp=False)
    return Image(out.reshape(img.height, img.width, img.channels))


def rotate_about(img: Image, center: tuple[float, float], angle: float) -> Image:
    """Rotate the image content by `angle` about `center` (see module doc)."""
    return warp_rotate_scale(img, center, angle, 1.0)


def scale_about(img: Image, center: tuple[float, float], factor: float) -> Image:
    """Scale the image content by `factor` about `center`."""
    return warp_rotate_scale(img, center, 0.0, factor)


def crop(img: Image, box: BBox) -> Image:
    """Copy the pixels under `box` (clamped to the image); no resampling."""
    b = box.clamped(img.width, img.height)
    return Image(img.data[int(b.y_min):int(b.y_max), int(b.x_min):int(b.x_max)])


def resize(img: Image, out_w: int, out_h: int) -> Image:
    """Bilinear resample onto an out_h x out_w grid.

    Pixel centers are aligned via the half-pixel convention:
    src = (dst + 0.5) * in/out - 0.5, with source coordinates clamped to
    the image so constants are preserved at borders.
    """
    if out_w < 1 or out_h < 1:
        raise BadDimensions(f"target size {out_w}x{out_h} must be >= 1x1")
    if out_w == img.width and out_h == img.height:
        return img
    xs, ys = _output_grid(out_w, out_h)
    sx = (xs + 0.5) * (img.width / out_w) - 0.5
    sy = (ys + 0.5) * (img.height / out_h) - 0.5
    out = _sample_grid(img.data, sx, sy, clamp=True)
    return Image(out.reshape(out_h, out_w, img.channels))


def hflip(img: Image) -> Image:
    """Reverse column order per row; exact involution."""
    return Image(img.data[:, ::-1])


def to_gray(img: Image) -> np.ndarray:
    """Single-channel (H, W) view: unweighted channel mean for RGB."""
    if img.channels == 1:
        return img.data[:, :, 0]
    return img.data.mean(axis=2)


# ---------------------------------------------------------------------------
# PGM (P5) / PPM (P6) binary I/O, 8-bit, intensities mapped 0-255 <-> 0.0-1.0.

def write_pnm(path, img: Image) -> None:
    """Write 1-channel images as P5 and 3-channel as P6, maxval 255."""
    magic = b"P5" if img.channels == 1 else b"P6"
    raw = np.rint(img.data * 255.0).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(magic + b"\n%d %d\n255\n" % (img.width, img.height))
        f.write(raw.tobytes())


def read_pnm(path) -> Image:
    """Read a binary PGM/PPM written by write_pnm (or any 8-bit P5/P6)."""
    with open(path, "rb") as f:
        data = f.read()
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise ValueError(f"{path}: not a binary PGM/PPM file")
    channels = 1 if magic == b"P5" else 3

    # Header: magic, width, height, maxval as whitespace-separated tokens,
    # '#' comments allowed through end of line.
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace after maxval
    width, height, maxval = fields
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    n = width * height * channels
    raw = np.frombuffer(data, dtype=np.uint8, count=n, offset=pos)
    if raw.size != n:
        raise ValueError(f"{path}: truncated pixel data")
    arr = raw.reshape(height, width, channels).astype(np.float64) / 255.0
    return Image(arr)
