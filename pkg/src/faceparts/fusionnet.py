"""Deep fusion subnet over per-part conv features, trained with SGD +
Nesterov momentum, plus the deterministic stub encoder that stands in
for a pre-trained conv backbone.

Per-part feature maps (6x6x512 each) are channel-concatenated in the
fixed part order to 6x6x2048, flattened, and pushed through
FC6 -> ReLU -> FC7 -> FC8 -> softmax. FC7 activations (pre-nonlinearity;
no activation follows FC7) are the extracted deep features, one
2048-vector per modality, concatenated texture-first to 4096 dims.

Layer widths default to the published architecture (4096 / 2048 / 6)
and are configurable for desk-scale runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadDimensions, DivergedLoss, EmptySet, ShapeMismatch
from .imgcore import Image

FC6_WIDTH = 4096
FC7_WIDTH = 2048
N_CLASSES = 6

PARTS_INPUT_DIM = 6 * 6 * 2048   # four concatenated facial parts
SINGLE_INPUT_DIM = 6 * 6 * 512   # whole-face / single-part mode


def concat_parts(features: list[np.ndarray]) -> np.ndarray:
    """Channel-concatenate the four per-part maps at every spatial cell.

    Inputs come in the fixed part order (eyebrows, eyes, nose, mouth).
    """
    if len(features) != 4:
        raise ShapeMismatch(f"expected 4 part tensors, got {len(features)}")
    shapes = {np.asarray(f).shape for f in features}
    if len(shapes) != 1 or len(next(iter(shapes))) != 3:
        raise ShapeMismatch(f"part tensors must share one (h, w, c) shape, got {shapes}")
    return np.concatenate([np.asarray(f) for f in features], axis=2)


def he_init(fan_in: int, fan_out: int, rng: np.random.Generator,
            dtype=np.float32) -> np.ndarray:
    """(fan_out, fan_in) Gaussian weights with std sqrt(2 / fan_in)."""
    if fan_in < 1:
        raise ValueError("fan_in must be >= 1")
    std = np.sqrt(2.0 / fan_in)
    return (rng.standard_normal((fan_out, fan_in)) * std).astype(dtype)


class FusionNet:
    """FC6 -> ReLU -> FC7 -> FC8 parameters; y = W x + b per layer."""

    LAYERS = ("fc6", "fc7", "fc8")

    def __init__(self, params: dict[str, np.ndarray]):
        self.params = params

    @classmethod
    def init(cls, input_dim: int, fc6_width: int = FC6_WIDTH,
             fc7_width: int = FC7_WIDTH, n_classes: int = N_CLASSES,
             seed: int = 0, dtype=np.float32) -> "FusionNet":
        rng = np.random.default_rng(seed)
        params = {}
        dims = [input_dim, fc6_width, fc7_width, n_classes]
        for name, (d_in, d_out) in zip(cls.LAYERS, zip(dims, dims[1:])):
            params[f"{name}_w"] = he_init(d_in, d_out, rng, dtype)
            params[f"{name}_b"] = np.zeros(d_out, dtype=dtype)
        return cls(params)

    @classmethod
    def zeros(cls, input_dim: int, fc6_width: int = FC6_WIDTH,
              fc7_width: int = FC7_WIDTH, n_classes: int = N_CLASSES,
              dtype=np.float32) -> "FusionNet":
        net = cls.init(input_dim, fc6_width, fc7_width, n_classes, dtype=dtype)
        for name in net.params:
            net.params[name] = np.zeros_like(net.params[name])
        return net

    @property
    def input_dim(self) -> int:
        return self.params["fc6_w"].shape[1]

    @property
    def n_classes(self) -> int:
        return self.params["fc8_w"].shape[0]

    def copy(self) -> "FusionNet":
        return FusionNet({k: v.copy() for k, v in self.params.items()})

    def check_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.params.values())


def _as_batch(x: np.ndarray, input_dim: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x)
    single = arr.ndim != 2
    flat = arr.reshape(1, -1) if single else arr
    if flat.shape[1] != input_dim:
        raise ShapeMismatch(f"input flattens to {flat.shape[1]}, net expects {input_dim}")
    return flat, single


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax (max subtraction)."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_pass(net: FusionNet, X: np.ndarray):
    p = net.params
    z6 = X @ p["fc6_w"].T + p["fc6_b"]
    a6 = np.maximum(z6, 0)
    z7 = a6 @ p["fc7_w"].T + p["fc7_b"]
    z8 = z7 @ p["fc8_w"].T + p["fc8_b"]
    return z6, a6, z7, z8


def forward(net: FusionNet, x: np.ndarray):
    """Return (fc7_activation, logits, probs) for one input or a batch."""
    X, single = _as_batch(x, net.input_dim)
    X = X.reshape(X.shape[0], -1).astype(net.params["fc6_w"].dtype, copy=False)
    _, _, z7, z8 = _forward_pass(net, X)
    probs = softmax(z8)
    if single:
        return z7[0], z8[0], probs[0]
    return z7, z8, probs


def _normalize_batch(batch):
    """Accept a list of (tensor, label) pairs or an (X, y) pair of arrays."""
    if isinstance(batch, tuple) and len(batch) == 2 and np.asarray(batch[0]).ndim == 2:
        X = np.asarray(batch[0])
        y = np.asarray(batch[1], dtype=np.int64)
    else:
        pairs = list(batch)
        if not pairs:
            raise EmptySet("empty batch")
        X = np.stack([np.asarray(t).ravel() for t, _ in pairs])
        y = np.asarray([label for _, label in pairs], dtype=np.int64)
    if len(X) == 0:
        raise EmptySet("empty batch")
    return X, y


def loss_and_grads(net: FusionNet, batch, weight_decay: float = 0.0):
    """Mean cross-entropy and exact backprop gradients over a batch.

    The returned loss is the plain cross-entropy; weight decay enters the
    gradients only, as wd * W on weight matrices (never biases).
    """
    X, y = _normalize_batch(batch)
    dtype = net.params["fc6_w"].dtype
    X = X.reshape(X.shape[0], -1).astype(dtype, copy=False)
    if X.shape[1] != net.input_dim:
        raise ShapeMismatch(f"batch dim {X.shape[1]} != net input {net.input_dim}")
    if y.min() < 0 or y.max() >= net.n_classes:
        raise ValueError("labels outside class range")
    n = X.shape[0]
    p = net.params

    z6, a6, z7, z8 = _forward_pass(net, X)
    probs = softmax(z8)
    loss = float(-np.mean(np.log(np.maximum(probs[np.arange(n), y], 1e-300))))

    dz8 = (probs - np.eye(net.n_classes)[y]) / n
    dz8 = dz8.astype(dtype)
    grads = {
        "fc8_w": dz8.T @ z7,
        "fc8_b": dz8.sum(axis=0),
    }
    dz7 = dz8 @ p["fc8_w"]
    grads["fc7_w"] = dz7.T @ a6
    grads["fc7_b"] = dz7.sum(axis=0)
    da6 = dz7 @ p["fc7_w"]
    dz6 = da6 * (z6 > 0)
    grads["fc6_w"] = dz6.T @ X
    grads["fc6_b"] = dz6.sum(axis=0)
    if weight_decay:
        for name in FusionNet.LAYERS:
            grads[f"{name}_w"] += weight_decay * p[f"{name}_w"]
    return loss, grads


@dataclass
class OptState:
    """Per-parameter velocity buffers, zero-initialized."""

    velocity: dict[str, np.ndarray]

    @classmethod
    def for_net(cls, net: FusionNet) -> "OptState":
        return cls({k: np.zeros_like(v) for k, v in net.params.items()})


def nesterov_step(net: FusionNet, grads: dict[str, np.ndarray],
                  state: OptState, lr: float, momentum: float):
    """Sutskever update: v <- mu v - lr g; theta <- theta - mu v_prev + (1+mu) v.

    Applied in place via the equivalent single-pass form
    theta += mu^2 v_prev - (1+mu) lr g.
    """
    mu = momentum
    for name, param in net.params.items():
        g = grads[name]
        v = state.velocity[name]
        param += (mu * mu) * v
        param -= ((1.0 + mu) * lr) * g
        v *= mu
        v -= lr * g
    return net, state


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 12
    lr_start: float = 2e-4
    lr_end: float = 2e-5
    epochs: int = 150
    momentum: float = 0.9
    weight_decay: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if not (self.lr_start >= self.lr_end > 0):
            raise ValueError("need lr_start >= lr_end > 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")

    def lr_at(self, epoch: int) -> float:
        """Geometric decay from lr_start to lr_end across the epochs."""
        if self.epochs == 1:
            return self.lr_start
        frac = epoch / (self.epochs - 1)
        return self.lr_start * (self.lr_end / self.lr_start) ** frac


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    lr: float
    train_loss: float
    val_error: float


def classification_error(net: FusionNet, X: np.ndarray, y: np.ndarray) -> float:
    _, logits, _ = forward(net, X)
    return float(np.mean(np.argmax(logits, axis=1) != y))


def train(net: FusionNet, train_set, val_set, cfg: TrainConfig):
    """Seeded mini-batch SGD; returns (best_net, per-epoch logs).

    The snapshot returned is from the epoch with the lowest validation
    error; ties go to the higher epoch. train_loss in the log is the mean
    over that epoch's batch losses (computed before each step).
    """
    Xtr, ytr = _normalize_batch(train_set)
    Xva, yva = _normalize_batch(val_set)
    if len(Xtr) == 0 or len(Xva) == 0:
        raise EmptySet("train and validation sets must be non-empty")
    rng = np.random.default_rng(cfg.seed)
    state = OptState.for_net(net)
    best_net = net.copy()
    best_err = float("inf")
    logs: list[EpochLog] = []

    for epoch in range(cfg.epochs):
        lr = cfg.lr_at(epoch)
        order = rng.permutation(len(Xtr))
        batch_losses = []
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, grads = loss_and_grads(net, (Xtr[idx], ytr[idx]),
                                         weight_decay=cfg.weight_decay)
            if not np.isfinite(loss):
                raise DivergedLoss(f"non-finite loss at epoch {epoch}")
            nesterov_step(net, grads, state, lr, cfg.momentum)
            batch_losses.append(loss)
        val_error = classification_error(net, Xva, yva)
        logs.append(EpochLog(epoch, lr, float(np.mean(batch_losses)), val_error))
        if val_error <= best_err:  # <=: ties resolve to the higher epoch
            best_err = val_error
            best_net = net.copy()
    return best_net, logs


def extract_fc7(net: FusionNet, x: np.ndarray) -> np.ndarray:
    """The FC7 affine output (pre-nonlinearity) for one input."""
    fc7, _, _ = forward(net, x)
    return fc7


def fuse_modalities(tex_fc7: np.ndarray, depth_fc7: np.ndarray) -> np.ndarray:
    """Concatenate per-modality FC7 features, texture first."""
    a = np.asarray(tex_fc7).ravel()
    b = np.asarray(depth_fc7).ravel()
    if a.shape != b.shape:
        raise ShapeMismatch(f"modality features differ: {a.shape} vs {b.shape}")
    return np.concatenate([a, b])


# ---------------------------------------------------------------------------
# Stub encoder: a fixed seeded random projection of local patch statistics
# (intensity means and mean absolute centered-difference gradients, the
# crude analogue of conv edge responses), standing in for a pre-trained
# conv backbone. Linear in (image, |gradients|), hence Lipschitz; the same
# image always maps to the same tensor.

STUB_GRID = 6
STUB_CHANNELS = 512
STUB_SUBGRIDS = (1, 2, 4)
# Per cell: (1+4+16) sub-patches x 3 channels x (mean, |dx| mean, |dy| mean).
_STUB_STATS = sum(g * g for g in STUB_SUBGRIDS) * 3 * 3
# max-norm sensitivity of one statistic: means move by delta, gradient
# means by 2 * delta.
_STAT_SENSITIVITY = np.array(([1.0] * 3 + [2.0] * 6) *
                             sum(g * g for g in STUB_SUBGRIDS))


def _splits(lo: int, hi: int, k: int) -> list[tuple[int, int]]:
    bounds = [lo + ((hi - lo) * i) // k for i in range(k + 1)]
    return list(zip(bounds[:-1], bounds[1:]))


def stub_projection(seed: int = 0) -> np.ndarray:
    """The (512, n_stats) projection matrix stub_encode uses for this seed."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((STUB_CHANNELS, _STUB_STATS)) / np.sqrt(_STUB_STATS)


def stub_operator_bound(seed: int = 0) -> float:
    """C with ||encode(a) - encode(b)||_F <= C * max|a - b| for 64x64 inputs.

    A max-norm image change of delta moves each statistic by at most its
    sensitivity times delta, so per cell ||M D u|| <= sigma_max(M D)
    sqrt(n_stats) delta, summed in quadrature over the 6x6 cells.
    """
    m = stub_projection(seed) * _STAT_SENSITIVITY
    sigma = np.linalg.svd(m, compute_uv=False)[0]
    return float(sigma * STUB_GRID * np.sqrt(_STUB_STATS))


def stub_encode(part: Image, mean: np.ndarray | None = None,
                seed: int = 0) -> np.ndarray:
    """Encode a 64x64 part image to a (6, 6, 512) feature tensor.

    Single-channel inputs are replicated to 3 channels; `mean` (the
    dataset mean image, same HxWx3 shape) is subtracted first when given.
    Per spatial cell, sub-patch means of intensity and of absolute x/y
    gradients over 1x1 / 2x2 / 4x4 grids form the statistics vector,
    mapped through one seeded Gaussian projection shared by all cells.
    """
    if (part.height, part.width) != (64, 64):
        raise BadDimensions(f"stub encoder expects 64x64 input, got "
                            f"{part.height}x{part.width}")
    arr = part.data
    if part.channels == 1:
        arr = np.repeat(arr, 3, axis=2)
    if mean is not None:
        if mean.shape != arr.shape:
            raise ShapeMismatch(f"mean image shape {mean.shape} != {arr.shape}")
        arr = arr - mean

    gx = np.zeros_like(arr)
    gy = np.zeros_like(arr)
    gx[:, 1:-1] = np.abs(arr[:, 2:] - arr[:, :-2])
    gy[1:-1, :] = np.abs(arr[2:, :] - arr[:-2, :])

    proj = stub_projection(seed)
    out = np.empty((STUB_GRID, STUB_GRID, STUB_CHANNELS))
    row_cells = _splits(0, 64, STUB_GRID)
    for i, (y0, y1) in enumerate(row_cells):
        for j, (x0, x1) in enumerate(row_cells):
            stats = []
            for g in STUB_SUBGRIDS:
                for (sy0, sy1) in _splits(y0, y1, g):
                    for (sx0, sx1) in _splits(x0, x1, g):
                        window = (slice(sy0, sy1), slice(sx0, sx1))
                        stats.extend(arr[window].mean(axis=(0, 1)))
                        stats.extend(gx[window].mean(axis=(0, 1)))
                        stats.extend(gy[window].mean(axis=(0, 1)))
            out[i, j] = proj @ np.asarray(stats)
    return out
