"""PCA dimensionality reduction keeping a target fraction of variance.

Fitted on training-fold data only; the component count is the smallest
k whose cumulative explained variance reaches the target (default 99%).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, ShapeMismatch


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray          # (d,)
    basis: np.ndarray         # (d, k), orthonormal columns
    explained_ratio: float    # variance fraction the k components capture
    eigenvalues: np.ndarray   # all computed eigenvalues, descending

    @property
    def k(self) -> int:
        return self.basis.shape[1]


def pca_fit(X: np.ndarray, target_variance: float = 0.99) -> PcaModel:
    """Fit on the rows of X (n samples x d dims).

    Centered SVD; equivalent to the covariance eigendecomposition (and to
    its Gram-matrix dual when n < d) with eigenvalues s^2 / (n - 1).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need a 2-D matrix with at least 2 sample rows")
    if not 0.0 < target_variance <= 1.0:
        raise ValueError("target_variance must be in (0, 1]")
    n = X.shape[0]
    mean = X.mean(axis=0)
    Xc = X - mean
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    eigvals = (s * s) / (n - 1)
    total = eigvals.sum()
    if total <= 0.0:
        raise DegenerateData("total variance is zero")
    ratios = eigvals / total
    cum = np.cumsum(ratios)
    k = int(np.searchsorted(cum, target_variance - 1e-12) + 1)
    k = min(k, len(eigvals))
    basis = vt[:k].T.copy()
    # Deterministic sign: the largest-magnitude entry of each column positive.
    for j in range(k):
        col = basis[:, j]
        if col[np.argmax(np.abs(col))] < 0:
            basis[:, j] = -col
    return PcaModel(mean=mean, basis=basis, explained_ratio=float(cum[k - 1]),
                    eigenvalues=eigvals)


def pca_transform(model: PcaModel, x: np.ndarray) -> np.ndarray:
    """Project a vector (d,) or matrix (n, d) onto the retained basis."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.mean.shape[0]:
        raise ShapeMismatch(f"input dim {x.shape[-1]} != model dim {model.mean.shape[0]}")
    return (x - model.mean) @ model.basis


def pca_reconstruct(model: PcaModel, z: np.ndarray) -> np.ndarray:
    """Inverse map from component space back to the ambient space."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != model.k:
        raise ShapeMismatch(f"input dim {z.shape[-1]} != component count {model.k}")
    return z @ model.basis.T + model.mean
