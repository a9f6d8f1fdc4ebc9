import numpy as np
import pytest

from faceparts.errors import DegenerateData, ShapeMismatch
from faceparts.pca import pca_fit, pca_reconstruct, pca_transform


def test_line_in_3d_needs_one_component():
    t = np.linspace(-2, 2, 40)
    X = np.outer(t, [1.0, -2.0, 0.5]) + [4.0, 1.0, 0.0]
    model = pca_fit(X)
    assert model.k == 1
    assert model.explained_ratio == pytest.approx(1.0)


def test_isotropic_2d_needs_both_components():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((500, 2))
    model = pca_fit(X, target_variance=0.99)
    assert model.k == 2


def test_reconstruction_captures_target_variance():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((80, 30)) @ rng.standard_normal((30, 30))
    model = pca_fit(X, target_variance=0.99)
    Z = pca_transform(model, X)
    Xhat = pca_reconstruct(model, Z)
    centered = X - model.mean
    ratio = np.linalg.norm(X - Xhat) ** 2 / np.linalg.norm(centered) ** 2
    assert ratio <= 0.01 + 1e-12


def test_transform_of_mean_is_zero():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((20, 6))
    model = pca_fit(X)
    assert np.allclose(pca_transform(model, model.mean), 0.0, atol=1e-12)


def test_transform_is_affine():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((25, 8))
    model = pca_fit(X)
    x, y = rng.standard_normal(8), rng.standard_normal(8)
    for alpha in (0.0, 0.3, 1.0):
        lhs = pca_transform(model, alpha * x + (1 - alpha) * y)
        rhs = alpha * pca_transform(model, x) + (1 - alpha) * pca_transform(model, y)
        assert np.allclose(lhs, rhs, atol=1e-9)


def test_basis_orthonormal():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((40, 25))
    model = pca_fit(X, target_variance=0.95)
    gram = model.basis.T @ model.basis
    assert np.max(np.abs(gram - np.eye(model.k))) < 1e-8


def test_ratios_non_increasing_and_sum_bounded():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((30, 12)) * np.linspace(3, 0.1, 12)
    model = pca_fit(X)
    ratios = model.eigenvalues / model.eigenvalues.sum()
    assert np.all(np.diff(ratios) <= 1e-12)
    assert ratios.sum() <= 1 + 1e-9


def test_gram_route_rank_deficient_case():
    # fewer samples than dimensions: n=10, d=100, intrinsic rank 5
    rng = np.random.default_rng(6)
    X = rng.standard_normal((10, 5)) @ rng.standard_normal((5, 100))
    model = pca_fit(X, target_variance=0.999)
    assert model.k <= 5
    assert model.explained_ratio >= 0.999


def test_degenerate_data_rejected():
    X = np.full((5, 3), 2.0)
    with pytest.raises(DegenerateData):
        pca_fit(X)


def test_shape_mismatch():
    rng = np.random.default_rng(7)
    model = pca_fit(rng.standard_normal((10, 4)))
    with pytest.raises(ShapeMismatch):
        pca_transform(model, np.zeros(5))


def test_fit_is_deterministic():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((30, 10))
    a = pca_fit(X)
    b = pca_fit(X)
    assert np.array_equal(a.basis, b.basis)
    assert np.array_equal(a.mean, b.mean)
