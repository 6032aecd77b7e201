"""Kernel ridge regression with the squared-exponential kernel.

Fitting solves (K + gamma I) beta = t through a Cholesky factorization with
one step of iterative refinement, which keeps the linear-system residual at
rounding level even for small gamma.  Hyperparameters come from seeded
k-fold cross-validation over a (sigma, gamma) grid; ties prefer the
strongest smoothing (largest gamma, then largest sigma).

Training cost is cubic in the number of rows, so fits above ``max_train``
rows operate on a seeded uniform subsample.  Sparse or low-rank
approximations are deliberately out of scope.
"""

import warnings

import numpy as np
import scipy.linalg

from .data import as_matrix
from .kernels import kernel_dot, kernel_matrix, sq_dists

DEFAULT_MAX_TRAIN = 2000
DEFAULT_GAMMA_GRID = (1e-6, 1e-4, 1e-2, 1.0, 1e2)
SIGMA_OCTAVES = (0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
_MEDIAN_HEURISTIC_ROWS = 1000


class KrrModel:
    """Fitted kernel ridge regressor.

    train_inputs : (M, p) rows the dual weights refer to (possibly a
        subsample of the data passed to fit).
    beta : (M,) dual weights, or (M, T) for multi-output fits.
    sigma, gamma : kernel length-scale and ridge used in the solve.
    """

    def __init__(self, train_inputs, beta, sigma, gamma):
        self.train_inputs = np.asarray(train_inputs, dtype=np.float64)
        self.beta = np.asarray(beta, dtype=np.float64)
        self.sigma = float(sigma)
        self.gamma = float(gamma)
        if self.train_inputs.ndim != 2 or self.train_inputs.shape[0] < 1:
            raise ValueError("train_inputs must be a non-empty 2-d array")
        if self.beta.shape[0] != self.train_inputs.shape[0]:
            raise ValueError("beta length does not match train_inputs")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not np.isfinite(self.beta).all():
            raise ValueError("beta contains non-finite values")

    @property
    def p(self) -> int:
        return self.train_inputs.shape[1]

    def predict(self, z):
        """Kernel expansion k(z, train_inputs) @ beta."""
        z = as_matrix(z, "z")
        if z.shape[1] != self.p:
            raise ValueError(
                f"query has {z.shape[1]} columns, model expects {self.p}"
            )
        return kernel_dot(z, self.train_inputs, self.sigma, self.beta)


def _subsample_rows(n, cap, seed):
    """Sorted uniform subsample of row indices; identity when n <= cap."""
    if cap is None or n <= cap:
        return np.arange(n)
    return np.sort(np.random.default_rng(seed).permutation(n)[:cap])


def _solve_regularized(kernel, gamma, targets):
    """Solve (kernel + gamma I) beta = targets for SPD kernel + ridge.

    Tries a Cholesky factorization; on failure adds a one-off diagonal
    jitter of 1e-10 * mean(diag) and retries, warning about it.  A second
    failure raises with a hint to raise gamma.  One iterative-refinement
    pass follows the solve.
    """
    m = kernel.shape[0]
    system = kernel + gamma * np.eye(m)
    try:
        factor = scipy.linalg.cho_factor(system, check_finite=False)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * np.trace(kernel) / m
        warnings.warn(
            f"kernel solve failed at gamma={gamma}; retrying with diagonal "
            f"jitter {jitter:.3e}",
            RuntimeWarning,
            stacklevel=3,
        )
        system = system + jitter * np.eye(m)
        try:
            factor = scipy.linalg.cho_factor(system, check_finite=False)
        except np.linalg.LinAlgError:
            raise np.linalg.LinAlgError(
                f"kernel system is singular at gamma={gamma}; "
                "refit with a nonzero (larger) ridge gamma"
            ) from None
    beta = scipy.linalg.cho_solve(factor, targets, check_finite=False)
    residual = targets - system @ beta
    beta += scipy.linalg.cho_solve(factor, residual, check_finite=False)
    return beta


def fit_krr(z, t, sigma, gamma, max_train=DEFAULT_MAX_TRAIN, seed=0) -> KrrModel:
    """Fit dual weights for the given (sigma, gamma).

    t may be a vector or an (N, T) matrix; multi-output fits share the
    single factorization.  When z has more than max_train rows, a seeded
    uniform subsample of that size is used and stored in the model.
    """
    z = as_matrix(z, "z")
    t = np.asarray(t, dtype=np.float64)
    if t.shape[0] != z.shape[0]:
        raise ValueError("z and t row counts differ")
    if not np.isfinite(t).all():
        raise ValueError("targets contain non-finite values")
    sigma = float(sigma)
    gamma = float(gamma)
    if gamma < 0:
        raise ValueError(f"gamma must be non-negative, got {gamma}")
    rows = _subsample_rows(z.shape[0], max_train, seed)
    z, t = z[rows], t[rows]
    kernel = kernel_matrix(z, z, sigma)
    beta = _solve_regularized(kernel, gamma, t)
    return KrrModel(z, beta, sigma, gamma)


def median_distance(z, seed=0):
    """Median pairwise distance of (a subsample of) the rows of z."""
    z = as_matrix(z, "z")
    rows = _subsample_rows(z.shape[0], _MEDIAN_HEURISTIC_ROWS, seed)
    sub = z[rows]
    if sub.shape[0] < 2:
        return 1.0
    d2 = sq_dists(sub, sub)
    upper = d2[np.triu_indices(sub.shape[0], k=1)]
    med = float(np.sqrt(np.median(upper)))
    return med if med > 0 else 1.0


def default_sigma_grid(z, seed=0):
    """Median-distance anchor scaled over octaves 1/8 .. 8."""
    anchor = median_distance(z, seed=seed)
    return tuple(anchor * s for s in SIGMA_OCTAVES)


def cross_validate_krr(
    z,
    t,
    sigma_grid=None,
    gamma_grid=DEFAULT_GAMMA_GRID,
    folds=5,
    seed=0,
    max_train=DEFAULT_MAX_TRAIN,
):
    """Grid-search (sigma, gamma) by seeded k-fold CV.

    Returns (sigma, gamma, cv_mse) minimizing the mean out-of-fold squared
    error; exact ties resolve toward larger gamma, then larger sigma.
    Rows beyond max_train are subsampled with the same rule as fit_krr, so
    a subsequent fit with the same seed sees the same rows.
    """
    z = as_matrix(z, "z")
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 1:
        raise ValueError("cross-validation expects a single target column")
    if t.shape[0] != z.shape[0]:
        raise ValueError("z and t row counts differ")
    rows = _subsample_rows(z.shape[0], max_train, seed)
    z, t = z[rows], t[rows]
    n = z.shape[0]
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    if folds > n:
        raise ValueError(f"folds={folds} exceeds the {n} available rows")
    if sigma_grid is None:
        sigma_grid = default_sigma_grid(z, seed=seed)
    sigma_grid = [float(s) for s in sigma_grid]
    gamma_grid = [float(g) for g in gamma_grid]
    if not sigma_grid or not gamma_grid:
        raise ValueError("hyperparameter grids must be non-empty")

    perm = np.random.default_rng([seed, 1]).permutation(n)
    fold_parts = np.array_split(perm, folds)
    d2 = sq_dists(z, z)
    sse = np.zeros((len(sigma_grid), len(gamma_grid)))
    for part in fold_parts:
        val = np.sort(part)
        train = np.setdiff1d(perm, val, assume_unique=True)
        d2_tt = d2[np.ix_(train, train)]
        d2_vt = d2[np.ix_(val, train)]
        t_train, t_val = t[train], t[val]
        for i, sigma in enumerate(sigma_grid):
            scale = -0.5 / (sigma * sigma)
            k_tt = np.exp(scale * d2_tt)
            k_vt = np.exp(scale * d2_vt)
            for j, gamma in enumerate(gamma_grid):
                beta = _solve_regularized(k_tt, gamma, t_train)
                err = k_vt @ beta - t_val
                sse[i, j] += float(err @ err)

    best = None
    for i, sigma in enumerate(sigma_grid):
        for j, gamma in enumerate(gamma_grid):
            key = (sse[i, j], -gamma, -sigma)
            if best is None or key < best[0]:
                best = (key, sigma, gamma, sse[i, j])
    _, sigma, gamma, total = best
    return sigma, gamma, total / n
