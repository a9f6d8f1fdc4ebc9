"""Descriptor tests against independent brute-force oracles.

The oracles below were written before the vectorized implementations and
share only the documented conventions (centered differences with zero
border gradient, bin centers at k*20 degrees with circular wrap, tie
rule neighbor >= center, bits clockwise from the top-left neighbor).
"""

import math

import numpy as np
import pytest

from faceparts.descriptors import (FeatureVector, HOG_LENGTH_64, ULBP_LENGTH_64,
                                   early_fuse, hog, ulbp, ulbp_counts)
from faceparts.errors import BadDimensions
from faceparts.imgcore import Image


def gray(arr):
    return Image(np.asarray(arr, dtype=np.float64)[:, :, None])


# ---------------------------------------------------------------------------
# Naive per-pixel HOG oracle.

def hog_oracle(values, cell=8, block=2, bins=9, clip=0.2, eps=1e-6):
    h, w = len(values), len(values[0])
    cy, cx = h // cell, w // cell
    hist = [[[0.0] * bins for _ in range(cx)] for _ in range(cy)]
    for y in range(h):
        for x in range(w):
            if x == 0 or x == w - 1:
                gx = 0.0
            else:
                gx = values[y][x + 1] - values[y][x - 1]
            if y == 0 or y == h - 1:
                gy = 0.0
            else:
                gy = values[y + 1][x] - values[y - 1][x]
            mag = math.hypot(gx, gy)
            theta = math.degrees(math.atan2(gy, gx)) % 180.0
            t = theta / (180.0 / bins)
            k0 = int(math.floor(t)) % bins
            frac = t - math.floor(t)
            hist[y // cell][x // cell][k0] += mag * (1.0 - frac)
            hist[y // cell][x // cell][(k0 + 1) % bins] += mag * frac
    out = []
    for by in range(cy - block + 1):
        for bx in range(cx - block + 1):
            v = []
            for dy in range(block):
                for dx in range(block):
                    v.extend(hist[by + dy][bx + dx])
            norm = math.sqrt(sum(c * c for c in v))
            v = [c / (norm + eps) for c in v]
            v = [min(c, clip) for c in v]
            norm = math.sqrt(sum(c * c for c in v))
            out.extend(c / (norm + eps) for c in v)
    return np.asarray(out)


# ---------------------------------------------------------------------------
# Naive double-loop uniform-LBP oracle.

_OFFSETS = ((-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0))


def _transitions(pattern):
    return sum(((pattern >> i) & 1) != ((pattern >> ((i + 1) % 8)) & 1)
               for i in range(8))


def ulbp_oracle_counts(values, cell=16):
    h, w = len(values), len(values[0])
    uniform = sorted(p for p in range(256) if _transitions(p) <= 2)
    bin_of = {p: i for i, p in enumerate(uniform)}
    cells_y = (h + cell - 1) // cell
    cells_x = (w + cell - 1) // cell
    counts = np.zeros((cells_y * cells_x, 59), dtype=np.int64)
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            code = 0
            for bit, (dx, dy) in enumerate(_OFFSETS):
                if values[y + dy][x + dx] >= values[y][x]:
                    code |= 1 << bit
            b = bin_of.get(code, 58)
            counts[(y // cell) * cells_x + (x // cell), b] += 1
    return counts


class TestHog:
    def test_constant_image_is_all_zeros(self):
        out = hog(gray(np.full((64, 64), 0.4)))
        assert len(out) == HOG_LENGTH_64
        assert np.all(out.values == 0.0)

    def test_horizontal_ramp_hits_zero_degree_bin(self):
        ramp = np.tile(np.linspace(0, 1, 64), (64, 1))
        out = hog(gray(ramp)).values.reshape(-1, 9)
        energy = out.sum(axis=0)
        assert energy[0] > 0
        assert np.allclose(energy[1:], 0.0, atol=1e-12)

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(3):
            values = rng.random((64, 64))
            mine = hog(gray(values)).values
            ref = hog_oracle(values.tolist())
            assert mine.shape == ref.shape
            assert np.max(np.abs(mine - ref)) < 1e-5

    def test_block_norms_bounded(self):
        rng = np.random.default_rng(5)
        out = hog(gray(rng.random((64, 64)))).values.reshape(-1, 36)
        assert np.all(np.linalg.norm(out, axis=1) <= 1 + 1e-6)

    def test_brightness_invariance(self):
        rng = np.random.default_rng(6)
        values = rng.random((64, 64)) * 0.5
        a = hog(gray(values)).values
        b = hog(gray(values + 0.3)).values
        assert np.allclose(a, b, atol=1e-6)

    def test_dimension_check(self):
        with pytest.raises(BadDimensions):
            hog(gray(np.zeros((60, 64))))


class TestUlbp:
    def test_constant_image_single_bin(self):
        counts = ulbp_counts(gray(np.full((64, 64), 0.5)))
        # every neighbor >= center -> pattern 0b11111111, a uniform pattern
        nonzero_bins = np.nonzero(counts.sum(axis=0))[0]
        assert len(nonzero_bins) == 1
        assert counts.sum() == 62 * 62

    def test_single_cell_histogram_sums_to_one(self):
        rng = np.random.default_rng(2)
        out = ulbp(gray(rng.random((16, 16))), cell_size=16)
        assert out.values.shape == (59,)
        assert out.values.sum() == pytest.approx(1.0)

    def test_matches_bruteforce_counts_exactly(self):
        rng = np.random.default_rng(3)
        for _ in range(3):
            values = rng.random((64, 64))
            mine = ulbp_counts(gray(values))
            ref = ulbp_oracle_counts(values.tolist())
            assert np.array_equal(mine, ref)

    def test_partition_of_interior_pixels(self):
        rng = np.random.default_rng(4)
        counts = ulbp_counts(gray(rng.random((64, 64))))
        assert counts.sum() == 62 * 62

    def test_length_and_normalization(self):
        rng = np.random.default_rng(7)
        out = ulbp(gray(rng.random((64, 64))))
        assert len(out) == ULBP_LENGTH_64
        sums = out.values.reshape(16, 59).sum(axis=1)
        assert np.allclose(sums, 1.0)

    def test_brightness_invariance(self):
        rng = np.random.default_rng(8)
        values = rng.random((64, 64)) * 0.5
        a = ulbp(gray(values)).values
        b = ulbp(gray(values + 0.25)).values
        assert np.allclose(a, b, atol=1e-6)


class TestEarlyFuse:
    def test_single_vector_identity(self):
        v = FeatureVector(np.arange(3.0), "a")
        assert early_fuse([v]) is v

    def test_concatenation_order(self):
        a = FeatureVector(np.array([1.0, 2, 3]), "a")
        b = FeatureVector(np.array([4.0, 5, 6, 7]), "b")
        fused = early_fuse([a, b])
        assert len(fused) == 7
        assert np.allclose(fused.values, [1, 2, 3, 4, 5, 6, 7])

    def test_four_hog_parts_length(self):
        rng = np.random.default_rng(9)
        parts = [hog(gray(rng.random((64, 64)))) for _ in range(4)]
        assert len(early_fuse(parts)) == 4 * HOG_LENGTH_64 == 7056

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            early_fuse([])
