"""Hand-crafted descriptors: HOG and uniform-LBP histograms.

HOG: centered-difference gradients ([-1, 0, 1], zero at the image
border), 9 unsigned orientation bins over [0, 180) with linear bin
interpolation, 8x8-pixel cells, 2x2-cell blocks at stride 1 cell,
L2-hysteresis block normalization (clip 0.2, eps 1e-6). On 64x64 input:
7x7 blocks x 4 cells x 9 bins = 1764 values.

ULBP: 8-neighbor radius-1 patterns (nearest-neighbor taps, neighbor >=
center sets the bit, bits clockwise from the top-left neighbor), mapped
to the 58 uniform patterns plus one catch-all bin, histogrammed per
16x16 cell and L1-normalized. On 64x64 input: 16 cells x 59 bins = 944
values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadDimensions
from .imgcore import Image, to_gray

HOG_CELL = 8
HOG_BLOCK = 2
HOG_BINS = 9
HOG_CLIP = 0.2
HOG_EPS = 1e-6
HOG_LENGTH_64 = 7 * 7 * HOG_BLOCK * HOG_BLOCK * HOG_BINS  # 1764

ULBP_CELL = 16
ULBP_BINS = 59  # 58 uniform patterns + 1 catch-all
ULBP_LENGTH_64 = 16 * ULBP_BINS  # 944


@dataclass(frozen=True)
class FeatureVector:
    """Flat descriptor values plus a tag naming how they were produced."""

    values: np.ndarray
    descriptor_id: str

    def __len__(self) -> int:
        return self.values.shape[0]


def _gradients(gray: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centered differences; border rows/columns carry zero gradient."""
    gx = np.zeros_like(gray)
    gy = np.zeros_like(gray)
    gx[:, 1:-1] = gray[:, 2:] - gray[:, :-2]
    gy[1:-1, :] = gray[2:, :] - gray[:-2, :]
    return gx, gy


def hog(img: Image, cell_size: int = HOG_CELL, block_size: int = HOG_BLOCK,
        n_bins: int = HOG_BINS, clip: float = HOG_CLIP,
        eps: float = HOG_EPS) -> FeatureVector:
    """Block-normalized histogram of oriented gradients."""
    gray = to_gray(img)
    h, w = gray.shape
    if h % cell_size or w % cell_size:
        raise BadDimensions(f"{h}x{w} not divisible by cell size {cell_size}")
    cy, cx = h // cell_size, w // cell_size

    gx, gy = _gradients(gray)
    mag = np.hypot(gx, gy)
    theta = np.degrees(np.arctan2(gy, gx)) % 180.0  # [0, 180)

    # Linear interpolation between the two nearest bin centers (k * 180/n).
    t = theta * (n_bins / 180.0)
    k0 = np.floor(t).astype(np.int64)
    frac = t - k0
    k0 %= n_bins
    k1 = (k0 + 1) % n_bins

    rows = (np.arange(h) // cell_size)[:, None].repeat(w, axis=1)
    cols = (np.arange(w) // cell_size)[None, :].repeat(h, axis=0)
    hist = np.zeros((cy, cx, n_bins))
    np.add.at(hist, (rows, cols, k0), mag * (1.0 - frac))
    np.add.at(hist, (rows, cols, k1), mag * frac)

    by, bx = cy - block_size + 1, cx - block_size + 1
    out = np.empty((by, bx, block_size * block_size * n_bins))
    for i in range(by):
        for j in range(bx):
            v = hist[i:i + block_size, j:j + block_size].ravel()
            v = v / (np.linalg.norm(v) + eps)
            v = np.minimum(v, clip)
            out[i, j] = v / (np.linalg.norm(v) + eps)
    return FeatureVector(
        out.ravel(),
        f"hog[cell={cell_size},block={block_size},bins={n_bins}]")


# Bit order: clockwise from the top-left neighbor, (dx, dy) offsets.
_LBP_OFFSETS = ((-1, -1), (0, -1), (1, -1), (1, 0),
                (1, 1), (0, 1), (-1, 1), (-1, 0))


def _uniform_table() -> np.ndarray:
    """Map 8-bit pattern -> bin: uniform patterns 0..57, catch-all 58."""
    table = np.full(256, ULBP_BINS - 1, dtype=np.int64)
    uniform = [p for p in range(256)
               if sum(((p >> i) & 1) != ((p >> ((i + 1) % 8)) & 1)
                      for i in range(8)) <= 2]
    for bin_idx, p in enumerate(uniform):
        table[p] = bin_idx
    return table


_ULBP_TABLE = _uniform_table()


def lbp_codes(gray: np.ndarray) -> np.ndarray:
    """8-bit LBP code per interior pixel; shape (H-2, W-2)."""
    center = gray[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.int64)
    for bit, (dx, dy) in enumerate(_LBP_OFFSETS):
        neighbor = gray[1 + dy:gray.shape[0] - 1 + dy,
                        1 + dx:gray.shape[1] - 1 + dx]
        codes |= (neighbor >= center).astype(np.int64) << bit
    return codes


def ulbp_counts(img: Image, cell_size: int = ULBP_CELL) -> np.ndarray:
    """Integer per-cell pattern counts, shape (n_cells, 59).

    Pixels on the image border have no full neighborhood and are skipped;
    every interior pixel is counted exactly once, in the cell containing it.
    """
    gray = to_gray(img)
    h, w = gray.shape
    bins = _ULBP_TABLE[lbp_codes(gray)]  # (h-2, w-2), pixel (y+1, x+1)

    hists = []
    for y0 in range(0, h, cell_size):
        for x0 in range(0, w, cell_size):
            ys = slice(max(y0, 1) - 1, min(y0 + cell_size, h - 1) - 1)
            xs = slice(max(x0, 1) - 1, min(x0 + cell_size, w - 1) - 1)
            hists.append(np.bincount(bins[ys, xs].ravel(), minlength=ULBP_BINS))
    return np.stack(hists)


def ulbp(img: Image, cell_size: int = ULBP_CELL) -> FeatureVector:
    """Per-cell uniform-LBP histograms, L1-normalized and concatenated."""
    counts = ulbp_counts(img, cell_size).astype(np.float64)
    totals = counts.sum(axis=1, keepdims=True)
    hist = np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
    return FeatureVector(hist.ravel(), f"ulbp[cell={cell_size},bins={ULBP_BINS}]")


def early_fuse(parts: list[FeatureVector]) -> FeatureVector:
    """Concatenate descriptor vectors in the order given.

    Callers pass parts in the fixed PartKind order, texture before depth
    when both modalities are fused.
    """
    if not parts:
        raise ValueError("nothing to fuse")
    if len(parts) == 1:
        return parts[0]
    return FeatureVector(
        np.concatenate([p.values for p in parts]),
        "+".join(p.descriptor_id for p in parts))
