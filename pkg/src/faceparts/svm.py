"""Polynomial-kernel SVM: SMO binary solver plus one-vs-one multiclass.

The binary solver is Platt-style SMO with maximal-violating-pair working
set selection (ties resolved toward the lowest index), run until the
duality-gap stopping rule m - M <= tol, which bounds every per-variable
KKT violation by tol. Multiclass wraps one binary machine per class pair
with majority voting; the multiclass path standardizes features (mean /
std from the training data) before the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ShapeMismatch, SingleClass


@dataclass(frozen=True)
class KernelParams:
    """k(x, y) = (gamma <x, y> + coef0)^degree with box constraint C.

    gamma=None resolves to 1/dim at fit time.
    """

    degree: int = 3
    gamma: float | None = None
    coef0: float = 1.0
    C: float = 1.0

    def resolved(self, dim: int) -> "KernelParams":
        if self.gamma is not None:
            return self
        return replace(self, gamma=1.0 / dim)


def poly_kernel(x: np.ndarray, y: np.ndarray, params: KernelParams) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeMismatch(f"kernel inputs {x.shape} vs {y.shape}")
    if params.gamma is None:
        raise ValueError("gamma unresolved; call params.resolved(dim) first")
    return float((params.gamma * np.dot(x, y) + params.coef0) ** params.degree)


def kernel_matrix(A: np.ndarray, B: np.ndarray, params: KernelParams) -> np.ndarray:
    """Pairwise kernel values, shape (len(A), len(B))."""
    if params.gamma is None:
        raise ValueError("gamma unresolved")
    return (params.gamma * (A @ B.T) + params.coef0) ** params.degree


@dataclass(frozen=True)
class BinarySvm:
    support_vectors: np.ndarray   # (s, d)
    dual_coef: np.ndarray         # (s,), alpha_i * y_i
    bias: float
    params: KernelParams
    max_kkt_violation: float
    support_indices: np.ndarray   # rows of the training set kept as SVs

    def decision(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        K = kernel_matrix(X, self.support_vectors, self.params)
        return K @ self.dual_coef + self.bias


def svm_train_binary(X: np.ndarray, y: np.ndarray, params: KernelParams,
                     tol: float = 1e-3, max_iter: int = 200_000) -> BinarySvm:
    """SMO on labels in {-1, +1}; raises SingleClass if one side is missing."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ShapeMismatch("X must be (n, d) with matching label vector")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise SingleClass("both classes must be present")
    params = params.resolved(X.shape[1])
    n = X.shape[0]
    C = params.C
    K = kernel_matrix(X, X, params)

    alpha = np.zeros(n)
    u = np.zeros(n)              # u_k = sum_l alpha_l y_l K_lk (no bias)
    neg_err = y - u              # -E_k = y_k - u_k; KKT bounds on the bias
    diag = np.diag(K).copy()

    for _ in range(max_iter):
        in_up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        in_low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        up_vals = np.where(in_up, neg_err, -np.inf)
        i = int(np.argmax(up_vals))
        m = up_vals[i]
        if m - np.min(np.where(in_low, neg_err, np.inf)) <= tol:
            break

        # Second-order partner choice (largest single-pair gain) avoids the
        # zigzag stalls of plain maximal-violating-pair selection; ties and
        # the i choice stay first-index deterministic. If the best partner
        # cannot move (both variables pinned at their box bounds), try the
        # next one; no movable partner at all ends the solve.
        diff = m - neg_err
        a = np.maximum(diag[i] + diag - 2.0 * K[i], 1e-12)
        gain = np.where(in_low & (diff > 1e-12), (diff * diff) / a, -np.inf)
        moved = False
        while np.max(gain) > -np.inf:
            j = int(np.argmax(gain))
            # Two-variable subproblem along the equality constraint.
            if y[i] != y[j]:
                lo = max(0.0, alpha[j] - alpha[i])
                hi = min(C, C + alpha[j] - alpha[i])
            else:
                lo = max(0.0, alpha[i] + alpha[j] - C)
                hi = min(C, alpha[i] + alpha[j])
            eta = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-12)
            # E_i - E_j = neg_err[j] - neg_err[i]
            aj_new = float(np.clip(alpha[j] + y[j] * (neg_err[j] - neg_err[i]) / eta,
                                   lo, hi))
            ai_new = alpha[i] + y[i] * y[j] * (alpha[j] - aj_new)
            if aj_new != alpha[j] or ai_new != alpha[i]:
                du = (ai_new - alpha[i]) * y[i] * K[i] + (aj_new - alpha[j]) * y[j] * K[j]
                u += du
                neg_err -= du
                alpha[i], alpha[j] = ai_new, aj_new
                moved = True
                break
            gain[j] = -np.inf
        if not moved:
            break

    # Bias from the feasible interval [M, m]; at convergence m - M <= tol.
    in_up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    in_low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
    m = np.max(np.where(in_up, neg_err, -np.inf))
    M = np.min(np.where(in_low, neg_err, np.inf))
    bias = float((m + M) / 2.0)
    viol = float(max(np.max(np.where(in_up, neg_err - bias, 0.0), initial=0.0),
                     np.max(np.where(in_low, bias - neg_err, 0.0), initial=0.0)))

    keep = alpha > 1e-12
    return BinarySvm(support_vectors=X[keep].copy(),
                     dual_coef=(alpha * y)[keep],
                     bias=bias, params=params, max_kkt_violation=viol,
                     support_indices=np.where(keep)[0])


def kkt_residuals(svm: BinarySvm, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-sample KKT violation of a trained machine on its training set.

    X and y must be the exact arrays the machine was trained on.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    margins = y * svm.decision(X)
    alpha = np.zeros(len(X))
    alpha[svm.support_indices] = np.abs(svm.dual_coef)
    C = svm.params.C
    res = np.zeros(len(X))
    at_zero = alpha <= 1e-9
    at_c = alpha >= C - 1e-9
    free = ~(at_zero | at_c)
    res[at_zero] = np.maximum(0.0, 1.0 - margins[at_zero])
    res[at_c] = np.maximum(0.0, margins[at_c] - 1.0)
    res[free] = np.abs(margins[free] - 1.0)
    return res


@dataclass(frozen=True)
class SvmModel:
    """One-vs-one multiclass machine with internal feature standardization."""

    classes: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]
    machines: tuple[BinarySvm, ...]
    params: KernelParams
    feat_mean: np.ndarray
    feat_std: np.ndarray
    extra: dict = field(default_factory=dict)

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(np.asarray(X, dtype=np.float64)) - self.feat_mean) / self.feat_std


def svm_train_multiclass(X: np.ndarray, y: np.ndarray,
                         params: KernelParams = KernelParams(),
                         tol: float = 1e-3) -> SvmModel:
    """Train all class-pair machines on standardized features."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise SingleClass("need at least two classes")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    Xs = (X - mean) / std
    params = params.resolved(X.shape[1])

    pairs = []
    machines = []
    for ai in range(len(classes)):
        for bi in range(ai + 1, len(classes)):
            a, b = classes[ai], classes[bi]
            mask = (y == a) | (y == b)
            yy = np.where(y[mask] == a, 1.0, -1.0)
            machines.append(svm_train_binary(Xs[mask], yy, params, tol=tol))
            pairs.append((a, b))
    return SvmModel(classes=classes, pairs=tuple(pairs), machines=tuple(machines),
                    params=params, feat_mean=mean, feat_std=std)


def vote(classes: tuple[int, ...], pairs, decisions) -> int:
    """Majority vote; ties by summed signed margins, then lowest class."""
    votes = {c: 0 for c in classes}
    margin = {c: 0.0 for c in classes}
    for (a, b), d in zip(pairs, decisions):
        winner = a if d >= 0 else b
        votes[winner] += 1
        margin[a] += d
        margin[b] -= d
    best_votes = max(votes.values())
    tied = [c for c in classes if votes[c] == best_votes]
    if len(tied) == 1:
        return tied[0]
    best_margin = max(margin[c] for c in tied)
    return min(c for c in tied if margin[c] == best_margin)


def svm_predict(model: SvmModel, x: np.ndarray) -> int:
    """Predict the class of a single feature vector."""
    return int(svm_predict_many(model, np.atleast_2d(x))[0])


def svm_predict_many(model: SvmModel, X: np.ndarray) -> np.ndarray:
    Xs = model.standardize(X)
    decisions = np.stack([m.decision(Xs) for m in model.machines], axis=1)
    return np.array([vote(model.classes, model.pairs, decisions[r])
                     for r in range(len(Xs))], dtype=np.int64)
