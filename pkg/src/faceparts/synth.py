"""Synthetic face dataset for desk-scale verification.

Each subject gets a smooth randomized base face on a 128x128 canvas with
a plausible 49-landmark layout; each expression applies a deterministic
deformation concentrated in the mouth / eye / brow regions (scaled by
intensity), rendered consistently into texture, depth and the landmark
coordinates. Every sample is then perturbed by a random in-plane
rotation (up to +/-0.35 rad) and scale (0.8..1.25) about the mouth-top
landmark, which the alignment stage must undo. Per-sample background
clutter lands outside the face so whole-face features pick up nuisance
that part crops mostly avoid.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .harness import EXPRESSIONS, NEUTRAL, SampleRecord, derive_seed, write_manifest
from .imgcore import Image, warp_rotate_scale, write_pnm
from .landmarks import LandmarkSet, transform_landmarks, write_landmarks

CANVAS = 128
ROTATION_MAX = 0.35
SCALE_RANGE = (0.8, 1.25)
INTENSITY_STRENGTH = {3: 0.7, 4: 1.0}


def canonical_landmarks() -> np.ndarray:
    """The 49-point base layout (1-based indices documented in landmarks)."""
    pts = [
        # P1-P10 eyebrows
        (38, 45), (43, 43), (48, 42), (53, 42), (58, 43),
        (70, 43), (75, 42), (80, 42), (85, 43), (90, 45),
        # P11-P19 nose
        (64, 50), (64, 56), (64, 62), (64, 68),
        (56, 72), (60, 73), (64, 74), (68, 73), (72, 72),
        # P20-P31 eyes (left outer->inner->lower, then right inner->outer)
        (42, 52), (46, 50), (50, 50), (53, 52), (50, 54), (46, 54),
        (75, 52), (79, 50), (83, 50), (86, 52), (83, 54), (79, 54),
        # P32-P43 outer lip, P44-P49 inner lip
        (48, 88), (53, 84), (58, 82), (64, 81), (70, 82), (75, 84),
        (80, 88), (75, 92), (70, 94), (64, 95), (58, 94), (53, 92),
        (54, 88), (64, 86), (74, 88), (70, 90), (64, 90), (58, 90),
    ]
    return np.asarray(pts, dtype=np.float64)


def _expression_shape(expression: str, k: float) -> dict:
    """Landmark deltas (1-based index -> (dx, dy)) and render parameters."""
    d: dict[int, tuple[float, float]] = {}

    def shift(indices, dx, dy):
        for i in indices:
            ox, oy = d.get(i, (0.0, 0.0))
            d[i] = (ox + dx, oy + dy)

    brows = range(1, 11)
    top_lip = (33, 34, 35, 36, 37)
    bottom_lip = (39, 40, 41, 42, 43)
    params = {"interior": 0.45, "eye_scale": 1.0, "mouth_open": 0.0,
              "nose_wrinkle": 0.0}

    if expression == "Angry":
        shift(brows, 0, 1.0 * k)
        shift((4, 7), 0, 2.0 * k)
        shift((5,), 1.5 * k, 3.0 * k)
        shift((6,), -1.5 * k, 3.0 * k)
        shift(bottom_lip, 0, -1.5 * k)
        shift((32, 38), 0, 1.0 * k)
        params.update(interior=0.35, eye_scale=1.0 - 0.25 * k)
    elif expression == "Disgust":
        shift(top_lip, 0, -3.0 * k)
        shift((45,), 0, -3.0 * k)
        shift(range(15, 20), 0, -2.0 * k)
        shift(brows, 0, 1.5 * k)
        params.update(interior=0.4, eye_scale=1.0 - 0.15 * k,
                      mouth_open=0.1 * k, nose_wrinkle=k)
    elif expression == "Fear":
        shift(brows, 0, -3.0 * k)
        shift(bottom_lip, 0, 4.0 * k)
        shift((32,), -3.0 * k, 0)
        shift((38,), 3.0 * k, 0)
        params.update(interior=0.15, eye_scale=1.0 + 0.6 * k, mouth_open=0.5 * k)
    elif expression == "Happy":
        shift((32,), -2.0 * k, -3.0 * k)
        shift((38,), 2.0 * k, -3.0 * k)
        shift((33, 43), -1.0 * k, -1.5 * k)
        shift((37, 39), 1.0 * k, -1.5 * k)
        shift((40, 41, 42), 0, 1.5 * k)
        params.update(interior=0.9, eye_scale=1.0 - 0.15 * k, mouth_open=0.3 * k)
    elif expression == "Sad":
        shift((32,), 1.0 * k, 3.0 * k)
        shift((38,), -1.0 * k, 3.0 * k)
        shift((33, 43, 37, 39), 0, 2.0 * k)
        shift((5, 6), 0, -2.5 * k)
        params.update(interior=0.3, eye_scale=1.0 - 0.1 * k)
    elif expression == "Surprise":
        shift(brows, 0, -4.5 * k)
        shift(bottom_lip, 0, 6.0 * k)
        shift(top_lip, 0, -1.0 * k)
        shift((32,), 2.0 * k, 1.5 * k)
        shift((38,), -2.0 * k, 1.5 * k)
        params.update(interior=0.05, eye_scale=1.0 + 0.9 * k, mouth_open=1.0 * k)
    elif expression != NEUTRAL:
        raise ValueError(f"unknown expression {expression!r}")
    return {"deltas": d, **params}


def _subject_traits(rng: np.random.Generator) -> dict:
    return {
        "tone": rng.uniform(0.58, 0.70),
        "fw": rng.uniform(0.94, 1.06),
        "fh": rng.uniform(0.95, 1.05),
        "jitter": rng.normal(0.0, 0.55, size=(49, 2)).clip(-1.5, 1.5),
        "blobs": [(rng.uniform(30, 98), rng.uniform(30, 100),
                   rng.uniform(6, 16), rng.uniform(-0.035, 0.035))
                  for _ in range(6)],
        "tint": rng.uniform(-0.05, 0.05, size=3),
    }


def _blob(xx, yy, cx, cy, sx, sy, amp):
    return amp * np.exp(-(((xx - cx) / sx) ** 2 + ((yy - cy) / sy) ** 2) / 2.0)


def _soft_ellipse(xx, yy, cx, cy, rx, ry, sharp=2.0):
    rho = np.sqrt(((xx - cx) / max(rx, 1e-6)) ** 2 + ((yy - cy) / max(ry, 1e-6)) ** 2)
    return 1.0 / (1.0 + np.exp((rho - 1.0) * 4.0 * sharp))


def _render(pts: np.ndarray, traits: dict, shape: dict,
            rng: np.random.Generator) -> tuple[Image, Image]:
    """Texture + depth for a deformed landmark set, upright pose."""
    yy, xx = np.mgrid[0:CANVAS, 0:CANVAS].astype(np.float64)
    cx, cy = 64.0, 66.0
    rx, ry = 40.0 * traits["fw"], 50.0 * traits["fh"]
    face = _soft_ellipse(xx, yy, cx, cy, rx, ry, sharp=3.0)

    # Skin with per-subject smooth variation.
    skin = np.full((CANVAS, CANVAS), traits["tone"])
    for bx, by, bs, ba in traits["blobs"]:
        skin += _blob(xx, yy, bx, by, bs, bs, ba)

    def p(i):
        return pts[i - 1]

    # Eyebrows: dark strokes through the brow landmarks.
    for i in range(1, 11):
        x, y = p(i)
        skin += _blob(xx, yy, x, y, 2.6, 1.3, -0.30)

    # Eyes: bright sclera ellipse + dark pupil, size tracks eye landmarks.
    eye_scale = shape["eye_scale"]
    for idx in (range(20, 26), range(26, 32)):
        group = pts[[i - 1 for i in idx]]
        ecx, ecy = group.mean(axis=0)
        ew = (group[:, 0].max() - group[:, 0].min()) / 2.0 + 1.0
        eh = 2.4 * eye_scale
        sclera = _soft_ellipse(xx, yy, ecx, ecy, ew, eh, sharp=3.0)
        skin = skin * (1 - sclera) + sclera * 0.88
        skin += _blob(xx, yy, ecx, ecy, 1.6, 1.6 * eye_scale, -0.45)

    # Nose: bright ridge, dark nostril dots, optional disgust wrinkle.
    for i in (11, 12, 13, 14):
        x, y = p(i)
        skin += _blob(xx, yy, x, y, 3.0, 4.0, 0.06)
    for i in (15, 17, 19):
        x, y = p(i)
        skin += _blob(xx, yy, x, y, 1.6, 1.1, -0.14)
    if shape["nose_wrinkle"] > 0:
        nx, ny = p(13)
        for dy in (-6.0, -9.5):
            skin += _blob(xx, yy, nx, ny + dy, 6.0, 0.9,
                          -0.18 * shape["nose_wrinkle"])

    # Mouth: lip ellipse from the deformed lip landmarks, interior fill.
    outer = pts[31:43]
    mcx, mcy = outer.mean(axis=0)
    mw = (outer[:, 0].max() - outer[:, 0].min()) / 2.0
    mh = (outer[:, 1].max() - outer[:, 1].min()) / 2.0
    lips = _soft_ellipse(xx, yy, mcx, mcy, mw, mh, sharp=3.0)
    skin = skin * (1 - lips) + lips * (traits["tone"] - 0.18)
    inner = _soft_ellipse(xx, yy, mcx, mcy, mw * 0.72, mh * 0.55, sharp=3.0)
    skin = skin * (1 - inner) + inner * shape["interior"]

    # Per-sample background clutter outside the face + capture noise.
    background = np.full((CANVAS, CANVAS), 0.12)
    for _ in range(8):
        background += _blob(xx, yy, rng.uniform(0, CANVAS), rng.uniform(0, CANVAS),
                            rng.uniform(6, 22), rng.uniform(6, 22),
                            rng.uniform(-0.25, 0.30))
    gray = background * (1 - face) + skin * face
    gray += rng.normal(0.0, 0.008, gray.shape)

    tex = np.stack([gray * (1.0 + t) for t in
                    (0.06 + traits["tint"][0], traits["tint"][1],
                     -0.08 + traits["tint"][2])], axis=2)
    texture = Image(np.clip(tex, 0.0, 1.0))

    # Depth: face dome + nose ridge, recessed sockets, mouth opening hole.
    rho2 = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2
    depth = 0.55 * np.sqrt(np.maximum(0.0, 1.0 - rho2))
    nx, ny = p(13)
    depth += _blob(xx, yy, nx, ny + 2, 4.0, 9.0, 0.22)
    for idx in (range(20, 26), range(26, 32)):
        ecx, ecy = pts[[i - 1 for i in idx]].mean(axis=0)
        depth += _blob(xx, yy, ecx, ecy, 4.0, 2.5, -0.07)
    for i in range(1, 11):
        x, y = p(i)
        depth += _blob(xx, yy, x, y, 2.6, 1.5, 0.04)
    if shape["mouth_open"] > 0:
        depth += shape["mouth_open"] * -0.30 * inner
    depth += lips * 0.04
    for _ in range(4):
        depth += (1 - face) * _blob(xx, yy, rng.uniform(0, CANVAS),
                                    rng.uniform(0, CANVAS), rng.uniform(8, 20),
                                    rng.uniform(8, 20), rng.uniform(0.0, 0.06))
    depth += rng.normal(0.0, 0.004, depth.shape)
    return texture, Image(np.clip(depth, 0.0, 1.0)[:, :, None])


def generate_sample(seed: int, subject: int, expression: str,
                    intensity: int):
    """One rendered sample; returns (texture, depth, landmarks, angle, scale)."""
    traits = _subject_traits(np.random.default_rng(derive_seed(seed, 0, subject)))
    expr_idx = EXPRESSIONS.index(expression) if expression in EXPRESSIONS else 6
    rng = np.random.default_rng(derive_seed(seed, 1, subject, expr_idx, intensity))

    k = 0.0 if expression == NEUTRAL else INTENSITY_STRENGTH[intensity]
    shape = _expression_shape(expression, k)
    pts = canonical_landmarks() + traits["jitter"]
    center = np.array([64.0, 66.0])
    pts = center + (pts - center) * np.array([traits["fw"], traits["fh"]])
    for idx, (dx, dy) in shape["deltas"].items():
        pts[idx - 1] += (dx, dy)

    texture, depth = _render(pts, traits, shape, rng)

    angle = rng.uniform(-ROTATION_MAX, ROTATION_MAX)
    scale = rng.uniform(*SCALE_RANGE)
    lms = LandmarkSet(pts)
    p35 = tuple(lms.point(35))
    texture = warp_rotate_scale(texture, p35, angle, scale)
    depth = warp_rotate_scale(depth, p35, angle, scale)
    lms = transform_landmarks(lms, p35, angle, scale)
    return texture, depth, lms, angle, scale


def generate_dataset(out_dir, n_subjects: int, seed: int = 0) -> str:
    """Write images, landmarks, manifest.csv and truth.csv; returns the
    manifest path."""
    if n_subjects < 2:
        raise ValueError("need at least 2 subjects")
    out_dir = os.path.abspath(os.fspath(out_dir))
    for sub in ("textures", "depths", "landmarks"):
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)

    records = []
    truth_rows = []
    for subject in range(n_subjects):
        sid = f"S{subject:03d}"
        cases = [(e, i) for e in EXPRESSIONS for i in (3, 4)] + [(NEUTRAL, 1)]
        for expression, intensity in cases:
            texture, depth, lms, angle, scale = generate_sample(
                seed, subject, expression, intensity)
            name = f"{sid}_{expression}_{intensity}"
            tex_path = os.path.join(out_dir, "textures", f"{name}.ppm")
            dep_path = os.path.join(out_dir, "depths", f"{name}.pgm")
            lm_path = os.path.join(out_dir, "landmarks", f"{name}.txt")
            write_pnm(tex_path, texture)
            write_pnm(dep_path, depth)
            write_landmarks(lm_path, lms)
            records.append(SampleRecord(
                subject_id=sid, expression=expression, intensity=intensity,
                texture_path=tex_path, depth_path=dep_path,
                landmarks_path=lm_path))
            truth_rows.append((name, angle, scale))

    manifest = os.path.join(out_dir, "manifest.csv")
    write_manifest(manifest, records)
    with open(os.path.join(out_dir, "truth.csv"), "w", encoding="utf-8",
              newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["sample_id", "applied_angle", "applied_scale"])
        for row in truth_rows:
            writer.writerow([row[0], repr(row[1]), repr(row[2])])
    return manifest
