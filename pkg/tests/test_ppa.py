"""Principal polynomial analysis baseline."""

import numpy as np
import pytest

from drr.manifolds import ManifoldSpec, generate_manifold
from drr.pca import fit_pca
from drr.ppa import PpaModel, PpaStage, fit_ppa


def _truncation_mse(model, x, k):
    err = x - model.reconstruct(x, k)
    return np.mean(np.sum(err**2, axis=1))


def test_parabola_stage_reproduces_curve():
    rng = np.random.default_rng(0)
    t = rng.uniform(-1.0, 1.0, size=2000)
    x = np.column_stack([t, t**2])
    m = fit_ppa(x, degree=3)
    # Stage 1 captures the bend: the final residual is negligible and a
    # one-parameter reconstruction recovers the curve.
    y = m.transform(x)
    assert np.abs(y[:, 1]).max() < 1e-3
    assert np.mean(np.abs(m.reconstruct(x, 1) - x)) < 1e-3


def test_degree_one_equals_pca():
    # A linear polynomial of an uncorrelated score has zero slope, so each
    # stage only removes the (zero) mean and the deflation equals PCA.
    rng = np.random.default_rng(1)
    x = rng.standard_normal((300, 5)) @ rng.standard_normal((5, 5)) + 2
    ppa = fit_ppa(x, degree=1)
    pca = fit_pca(x)
    for k in range(1, 6):
        a = ppa.reconstruct(x, k)
        b = pca.reconstruct(x, k)
        assert np.max(np.abs(a - b)) < 1e-8


def test_never_worse_than_pca():
    datasets = []
    rng = np.random.default_rng(2)
    datasets.append(rng.standard_normal((200, 4)))
    t = rng.uniform(-1, 1, 300)
    datasets.append(
        np.column_stack([t, t**2, t**3]) + 0.05 * rng.standard_normal((300, 3))
    )
    datasets.append(generate_manifold(ManifoldSpec(n_samples=500, tilt=0.6))[0])
    for x in datasets:
        ppa = fit_ppa(x, degree=3)
        pca = fit_pca(x)
        # absolute slack covers the full-width case where both errors are
        # rounding noise and their ratio is meaningless
        slack = 1e-18 * (1.0 + float(np.mean(x * x)))
        for k in range(1, x.shape[1] + 1):
            mse_ppa = _truncation_mse(ppa, x, k)
            mse_pca = _truncation_mse(pca, x, k)
            assert mse_ppa <= mse_pca * (1 + 1e-10) + slack


def test_gaussian_close_to_pca():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((2000, 4))
    ppa = fit_ppa(x, degree=3)
    pca = fit_pca(x)
    for k in range(1, 4):
        ratio = _truncation_mse(ppa, x, k) / _truncation_mse(pca, x, k)
        assert 0.9 < ratio <= 1.0 + 1e-10


def test_stage_orthogonality():
    x = generate_manifold(ManifoldSpec(n_samples=400, tilt=0.8, seed=4))[0]
    m = fit_ppa(x)
    for stage in m.stages:
        w = stage.direction.shape[0]
        assert abs(np.linalg.norm(stage.direction) - 1.0) < 1e-10
        assert np.max(np.abs(stage.complement @ stage.direction)) < 1e-10
        gram = stage.complement @ stage.complement.T
        assert np.max(np.abs(gram - np.eye(w - 1))) < 1e-10


def test_round_trip_exact():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((150, 4)) @ rng.standard_normal((4, 4)) + 1
    m = fit_ppa(x)
    back = m.inverse_transform(m.transform(x))
    assert np.max(np.abs(back - x)) < 1e-10
    assert np.max(np.abs(m.reconstruct(x, 4) - x)) < 1e-10
    fresh = rng.standard_normal((20, 4)) * 5
    assert np.max(np.abs(m.inverse_transform(m.transform(fresh)) - fresh)) < 1e-10


def test_secondary_curves_translate_along_backbone():
    # Reconstructed secondary curves are one fixed shape carried along the
    # primary curve: inverting a coordinate grid with the residual zeroed,
    # the fiber at any primary value differs from the fiber at the first
    # primary value by a constant shift.
    x = generate_manifold(ManifoldSpec(n_samples=2000, tilt=0.6, seed=6))[0]
    m = fit_ppa(x, degree=3)
    y = m.transform(x)
    a1 = np.linspace(y[:, 0].min(), y[:, 0].max(), 9)
    a2 = np.linspace(y[:, 1].min(), y[:, 1].max(), 7)
    grid = np.zeros((9 * 7, 3))
    grid[:, 0] = np.repeat(a1, 7)
    grid[:, 1] = np.tile(a2, 9)
    pts = m.inverse_transform(grid).reshape(9, 7, 3)
    fibers = pts - pts[:, :1, :]  # remove each fiber's own offset
    spread = fibers - fibers[0]
    assert np.max(np.abs(spread)) < 1e-6


def test_rank_deficient_degree_reduction():
    # Two distinct projection values cannot support a cubic; the fit must
    # warn and drop to the achievable degree.
    base = np.array([[0.0, 0.0], [1.0, 1.0]])
    x = np.repeat(base, 5, axis=0)
    with pytest.warns(RuntimeWarning, match="rank deficient"):
        m = fit_ppa(x, degree=3)
    assert m.stages[0].degree <= 1
    assert np.max(np.abs(m.inverse_transform(m.transform(x)) - x)) < 1e-10


def test_degree_zero_allowed():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((100, 3))
    m = fit_ppa(x, degree=0)
    assert all(s.degree == 0 for s in m.stages)
    assert np.max(np.abs(m.inverse_transform(m.transform(x)) - x)) < 1e-10


def test_validation_errors():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((50, 3))
    with pytest.raises(ValueError, match="degree must be non-negative"):
        fit_ppa(x, degree=-1)
    m = fit_ppa(x)
    with pytest.raises(ValueError, match="has 2 columns, expected 3"):
        m.transform(x[:, :2])
    with pytest.raises(ValueError, match=r"k must be in \[1, 3\]"):
        m.reconstruct(x, 4)
    with pytest.raises(ValueError, match="complement shape"):
        PpaStage(np.ones(3), np.eye(3), 1.0, np.zeros((2, 2)))
    with pytest.raises(ValueError, match="expected 2 stages"):
        PpaModel(np.zeros(3), [])


def test_fit_deterministic():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((120, 4))
    a = fit_ppa(x)
    b = fit_ppa(x)
    assert np.array_equal(a.transform(x), b.transform(x))
