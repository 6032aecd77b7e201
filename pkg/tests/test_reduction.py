"""Residual-regression reduction: fit, transforms, volume preservation."""

import numpy as np
import pytest

from drr.pca import fit_pca
from drr.reduction import DrrConfig, DrrModel, fit_drr, jacobian_fd


def parabola_data(n=500, seed=0, noise=0.0):
    rng = np.random.default_rng(seed)
    t = rng.uniform(-1.0, 1.0, size=n)
    x = np.column_stack([t, t**2])
    if noise:
        x += rng.standard_normal(x.shape) * noise
    return x


@pytest.fixture(scope="module")
def parabola_model():
    x = parabola_data()
    return x, fit_drr(x, DrrConfig(seed=0))


@pytest.fixture(scope="module")
def gaussian_model():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((400, 5)) @ rng.standard_normal((5, 5))
    return x, fit_drr(x, DrrConfig(seed=0, max_train=400))


def test_parabola_residual_vanishes(parabola_model):
    # The second score is an exact function of the first, so its residual
    # after regression is numerically negligible.
    x, m = parabola_model
    y = m.transform(x)
    assert np.max(np.abs(y[:, 1])) < 1e-3


def test_parabola_k1_beats_pca(parabola_model):
    x, m = parabola_model
    err_drr = np.mean(np.abs(m.reconstruct(x, 1) - x))
    assert err_drr < 1e-3
    pca = fit_pca(x)
    err_pca = np.mean(np.abs(pca.reconstruct(x, 1) - x))
    assert err_pca > 100 * err_drr


def test_round_trip(parabola_model, gaussian_model):
    for x, m in (parabola_model, gaussian_model):
        back = m.inverse_transform(m.transform(x))
        assert np.max(np.abs(back - x)) < 1e-8
        assert np.max(np.abs(m.reconstruct(x, m.d) - x)) < 1e-8


def test_round_trip_off_training_points(gaussian_model):
    _, m = gaussian_model
    rng = np.random.default_rng(2)
    fresh = rng.standard_normal((50, m.d)) * 3
    back = m.inverse_transform(m.transform(fresh))
    assert np.max(np.abs(back - fresh)) < 1e-8


def test_gaussian_variance_close_to_pca(gaussian_model):
    # Gaussian scores are independent, so the regressions find nothing and
    # residual variances stay near the score variances.
    x, m = gaussian_model
    scores = m.pca.transform(x)
    y = m.transform(x)
    for i in range(1, m.d):
        ratio = y[:, i].var() / scores[:, i].var()
        assert 0.9 < ratio < 1.1


def test_energy_compaction(parabola_model, gaussian_model):
    # Residual variance never materially exceeds score variance: the CV grid
    # includes heavy smoothing, whose predictor is essentially zero.
    for x, m in (parabola_model, gaussian_model):
        scores = m.pca.transform(x)
        y = m.transform(x)
        for i in range(1, m.d):
            assert y[:, i].var() <= 1.02 * scores[:, i].var()


def test_linear_mode_reduces_to_pca():
    # PC scores are uncorrelated, so least squares on them finds zero
    # weights and the transform equals the raw scores.
    rng = np.random.default_rng(3)
    x = rng.standard_normal((300, 4)) @ rng.standard_normal((4, 4)) + 5
    m = fit_drr(x, DrrConfig(regressor="linear"))
    scores = m.pca.transform(x)
    y = m.transform(x)
    scale = np.abs(scores).max()
    assert np.max(np.abs(y - scores)) < 1e-6 * scale


def test_heavy_smoothing_degenerates_to_pca(parabola_model):
    # A huge ridge pushes every prediction to zero, leaving plain PCA.
    x, _ = parabola_model
    m = fit_drr(x, DrrConfig(sigma=1.0, gamma=1e12))
    scores = m.pca.transform(x)
    y = m.transform(x)
    assert np.max(np.abs(y - scores)) < 1e-6


def test_parallel_forward_bitwise(gaussian_model):
    x, m = gaussian_model
    assert np.array_equal(m.transform(x, parallel=True), m.transform(x))


def test_pass_through_model_is_pca():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((100, 3))
    pca = fit_pca(x)
    m = DrrModel(pca, [None, None])
    assert np.array_equal(m.transform(x), pca.transform(x))
    assert np.allclose(
        m.inverse_transform(pca.transform(x)), pca.inverse_transform(pca.transform(x))
    )
    # The Jacobian of the linear map is the rotation itself.
    jac = jacobian_fd(m, x[0])
    assert np.max(np.abs(jac - pca.basis)) < 1e-8


def test_one_dimensional_pass_through():
    x = np.arange(10.0).reshape(-1, 1)
    m = fit_drr(x)
    assert m.regressors == []
    assert np.allclose(m.inverse_transform(m.transform(x)), x)


def test_residualize_from():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((200, 4))
    m = fit_drr(x, DrrConfig(residualize_from=3, max_train=200))
    assert m.regressors[0] is None
    assert m.regressors[1] is not None
    scores = m.pca.transform(x)
    y = m.transform(x)
    assert np.array_equal(y[:, :2], scores[:, :2])


def test_volume_preservation(parabola_model, gaussian_model):
    rng = np.random.default_rng(6)
    for x, m in (parabola_model, gaussian_model):
        pts = x[rng.permutation(x.shape[0])[:5]]
        for p in pts:
            det = np.linalg.det(jacobian_fd(m, p))
            assert abs(abs(det) - 1.0) < 1e-4


def test_jacobian_structure(parabola_model):
    # J time the inverse rotation is unit lower triangular: the map in score
    # coordinates subtracts functions of earlier coordinates only.
    x, m = parabola_model
    jac = jacobian_fd(m, x[3])
    in_scores = jac @ m.pca.basis.T
    assert np.allclose(np.diag(in_scores), 1.0, atol=1e-6)
    upper = np.triu(in_scores, k=1)
    assert np.max(np.abs(upper)) < 1e-6


def test_fixed_hyperparameters_skip_cv():
    x = parabola_data(n=80, seed=7)
    m = fit_drr(x, DrrConfig(sigma=0.5, gamma=1e-4))
    assert m.regressors[0].sigma == 0.5
    assert m.regressors[0].gamma == 1e-4


def test_shared_hyperparameters():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((150, 4))
    m = fit_drr(x, DrrConfig(share_hyperparams=True, max_train=150))
    pairs = {(r.sigma, r.gamma) for r in m.regressors}
    assert len(pairs) == 1


def test_fit_deterministic():
    x = parabola_data(n=150, seed=9, noise=0.05)
    a = fit_drr(x, DrrConfig(seed=3))
    b = fit_drr(x, DrrConfig(seed=3))
    assert np.array_equal(a.transform(x), b.transform(x))


def test_config_validation():
    with pytest.raises(ValueError, match="together"):
        DrrConfig(sigma=1.0)
    with pytest.raises(ValueError, match="at least 2"):
        DrrConfig(residualize_from=1)
    with pytest.raises(ValueError, match="unknown regressor"):
        DrrConfig(regressor="spline")


def test_shape_errors(gaussian_model):
    x, m = gaussian_model
    with pytest.raises(ValueError, match="model expects 5"):
        m.transform(x[:, :3])
    with pytest.raises(ValueError, match="model expects 5"):
        m.inverse_transform(x[:, :3])
    with pytest.raises(ValueError, match=r"k must be in \[1, 5\]"):
        m.reconstruct(x, 0)
    with pytest.raises(ValueError, match="point has 3 coordinates"):
        jacobian_fd(m, np.zeros(3))


def test_model_arity_validation():
    x = parabola_data(n=50, seed=10)
    pca = fit_pca(x)
    with pytest.raises(ValueError, match="expected 1 regressors"):
        DrrModel(pca, [])
