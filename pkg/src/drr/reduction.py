"""Dimensionality reduction via sequential residual regression.

The forward map rotates data into PCA scores, then replaces every score
after the first with its residual against a regression on all
higher-variance scores:

    y_1 = alpha_1
    y_i = alpha_i - f_i(alpha_1, ..., alpha_{i-1})    for i = 2..d

Each f_i is trained on raw scores, never on residuals, so the forward pass
can evaluate all regressions independently.  Inversion walks dimensions in
order, adding each prediction back before the next one is computed, and
finishes with the PCA inverse.  Both maps are exact bijections of R^d, and
because every elementary Jacobian is unit lower triangular composed with an
orthonormal rotation, the map preserves volume: |det J| = 1 everywhere.

Truncation to k coordinates zeroes the trailing residuals and runs the
inverse, which lands each dropped coordinate on its regression prediction
instead of on zero.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import as_matrix
from .krr import (
    DEFAULT_GAMMA_GRID,
    DEFAULT_MAX_TRAIN,
    KrrModel,
    cross_validate_krr,
    fit_krr,
)
from .pca import PcaModel, fit_pca


@dataclass(frozen=True)
class DrrConfig:
    """Fitting knobs.

    regressor : "kernel" for RBF kernel ridge (default), "linear" for
        ordinary least squares.  On exact PCA scores the linear mode
        reduces to the identity on scores (scores are uncorrelated), which
        makes it useful as a diagnostic.
    sigma, gamma : fix the kernel hyperparameters and skip
        cross-validation when both are given.
    share_hyperparams : run CV once, on the final (widest) regression, and
        reuse the chosen (sigma, gamma) for every dimension.
    residualize_from : first (1-based) dimension whose score is
        residualized; earlier scores pass through unchanged.  The default
        2 residualizes everything after the leading score.  Raising it
        trades fidelity for fitting cost on wide data.
    """

    regressor: str = "kernel"
    sigma: float | None = None
    gamma: float | None = None
    sigma_grid: tuple | None = None
    gamma_grid: tuple = DEFAULT_GAMMA_GRID
    folds: int = 5
    max_train: int = DEFAULT_MAX_TRAIN
    seed: int = 0
    share_hyperparams: bool = False
    residualize_from: int = 2

    def __post_init__(self):
        if self.regressor not in ("kernel", "linear"):
            raise ValueError(f"unknown regressor {self.regressor!r}")
        if (self.sigma is None) != (self.gamma is None):
            raise ValueError("fix sigma and gamma together or not at all")
        if self.residualize_from < 2:
            raise ValueError("residualize_from must be at least 2")


class LinearPredictor:
    """Least-squares affine predictor used by the linear regressor mode."""

    def __init__(self, weights, intercept):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.intercept = float(intercept)

    @property
    def p(self) -> int:
        return self.weights.shape[0]

    def predict(self, z):
        z = as_matrix(z, "z")
        return z @ self.weights + self.intercept


def _fit_linear(z, t) -> LinearPredictor:
    design = np.column_stack([z, np.ones(z.shape[0])])
    coef, *_ = np.linalg.lstsq(design, t, rcond=None)
    return LinearPredictor(coef[:-1], coef[-1])


class DrrModel:
    """Fitted reduction: a PCA rotation plus d-1 score regressions.

    regressors[i] predicts score i+1 from scores 0..i (zero-based); a None
    entry leaves that score untouched.  The list is empty when the data is
    one-dimensional and the map degenerates to plain PCA.
    """

    def __init__(self, pca: PcaModel, regressors):
        self.pca = pca
        self.regressors = list(regressors)
        if len(self.regressors) != max(pca.d - 1, 0):
            raise ValueError(
                f"expected {pca.d - 1} regressors for {pca.d} dimensions, "
                f"got {len(self.regressors)}"
            )
        for i, reg in enumerate(self.regressors):
            if reg is not None and reg.p != i + 1:
                raise ValueError(f"regressor {i} expects {reg.p} inputs, not {i + 1}")

    @property
    def d(self) -> int:
        return self.pca.d

    def transform(self, x, parallel=False):
        """Map inputs to residual coordinates.

        All regressions read raw scores, so with parallel=True they are
        evaluated concurrently in a thread pool (the kernel products
        release the GIL inside BLAS).  Results are identical either way.
        """
        scores = self.pca.transform(x)
        out = scores.copy()
        active = [(i, r) for i, r in enumerate(self.regressors) if r is not None]
        if not active:
            return out
        if parallel:
            with ThreadPoolExecutor() as pool:
                preds = list(
                    pool.map(lambda ir: ir[1].predict(scores[:, : ir[0] + 1]), active)
                )
            for (i, _), pred in zip(active, preds):
                out[:, i + 1] -= pred
        else:
            for i, reg in active:
                out[:, i + 1] -= reg.predict(scores[:, : i + 1])
        return out

    def inverse_transform(self, y):
        """Map residual coordinates back to the input space.

        Strictly sequential: coordinate i needs the reconstructed scores
        of every earlier coordinate before its prediction can be added.
        """
        y = as_matrix(y, "y")
        if y.shape[1] != self.d:
            raise ValueError(f"y has {y.shape[1]} columns, model expects {self.d}")
        scores = y.copy()
        for i, reg in enumerate(self.regressors):
            if reg is not None:
                scores[:, i + 1] += reg.predict(scores[:, : i + 1])
        return self.pca.inverse_transform(scores)

    def reconstruct(self, x, k):
        """Round trip through the leading k residual coordinates."""
        if not 1 <= k <= self.d:
            raise ValueError(f"k must be in [1, {self.d}], got {k}")
        y = self.transform(x)
        y[:, k:] = 0.0
        return self.inverse_transform(y)


def fit_drr(x, config: DrrConfig | None = None) -> DrrModel:
    """Fit the rotation and the per-dimension score regressions.

    Kernel regressions cross-validate (sigma, gamma) per dimension unless
    the config shares one choice or fixes the values outright.
    """
    if config is None:
        config = DrrConfig()
    x = as_matrix(x, "x")
    pca = fit_pca(x)
    scores = pca.transform(x)
    d = x.shape[1]
    if d == 1:
        return DrrModel(pca, [])

    active = [i for i in range(d - 1) if i + 2 >= config.residualize_from]
    regs: list = [None] * (d - 1)
    if not active:
        return DrrModel(pca, regs)

    if config.regressor == "linear":
        for i in active:
            regs[i] = _fit_linear(scores[:, : i + 1], scores[:, i + 1])
        return DrrModel(pca, regs)

    shared = None
    if config.sigma is not None:
        shared = (float(config.sigma), float(config.gamma))
    elif config.share_hyperparams:
        last = active[-1]
        sigma, gamma, _ = cross_validate_krr(
            scores[:, : last + 1],
            scores[:, last + 1],
            sigma_grid=config.sigma_grid,
            gamma_grid=config.gamma_grid,
            folds=config.folds,
            seed=config.seed,
            max_train=config.max_train,
        )
        shared = (sigma, gamma)

    for i in active:
        z, t = scores[:, : i + 1], scores[:, i + 1]
        if shared is not None:
            sigma, gamma = shared
        else:
            sigma, gamma, _ = cross_validate_krr(
                z,
                t,
                sigma_grid=config.sigma_grid,
                gamma_grid=config.gamma_grid,
                folds=config.folds,
                seed=config.seed,
                max_train=config.max_train,
            )
        regs[i] = fit_krr(
            z, t, sigma, gamma, max_train=config.max_train, seed=config.seed
        )
    return DrrModel(pca, regs)


def jacobian_fd(model: DrrModel, x, eps=1e-5):
    """Central-difference Jacobian of the forward map at a single point.

    Steps scale with coordinate magnitude: h_j = eps * (1 + |x_j|).  All
    2d displaced points go through one batched transform.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    d = model.d
    if x.shape[0] != d:
        raise ValueError(f"point has {x.shape[0]} coordinates, model expects {d}")
    steps = eps * (1.0 + np.abs(x))
    displaced = np.repeat(x[None, :], 2 * d, axis=0)
    for j in range(d):
        displaced[2 * j, j] += steps[j]
        displaced[2 * j + 1, j] -= steps[j]
    values = model.transform(displaced)
    jac = np.empty((d, d))
    for j in range(d):
        jac[:, j] = (values[2 * j] - values[2 * j + 1]) / (2.0 * steps[j])
    return jac
