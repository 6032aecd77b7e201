"""Principal polynomial analysis baseline.

A sequential deflation: each stage projects the current residual data onto
its leading principal direction, then bends the mean path by regressing
the remaining orthogonal coordinates on that projection with a univariate
polynomial.  The stage output is what the polynomial cannot explain,
expressed in the orthogonal complement frame, so every stage shrinks the
width by one.  After d-1 stages the representation is the d-1 curve
parameters plus the final one-dimensional residual.

The map is exactly invertible (each stage is a rotation plus a shift that
depends only on coordinates kept at that stage) but, unlike the residual
regressions in :mod:`drr.reduction`, it is not volume preserving: the
curve parameters feed a polynomial of unconstrained slope.

Truncation to k coordinates keeps the first k curve parameters and places
the dropped tail on the training mean path by zero-filling the stage-k
residual before inverting.  It does not zero-pad the transformed vector:
inverting a zero-padded vector would walk the deeper polynomials at their
origin values and can reconstruct worse than PCA.
"""

import warnings

import numpy as np

from .data import as_matrix

DEFAULT_DEGREE = 3


class PpaStage:
    """One deflation step.

    direction : (w,) leading principal direction of the stage data.
    complement : (w-1, w) orthonormal complement rows.
    alpha_scale : scaling applied to the projection before the polynomial,
        chosen at fit time to condition the Vandermonde system.
    coefficients : (degree+1, w-1) polynomial coefficients in increasing
        powers of the scaled projection, one column per residual
        coordinate.
    """

    def __init__(self, direction, complement, alpha_scale, coefficients):
        self.direction = np.asarray(direction, dtype=np.float64)
        self.complement = np.asarray(complement, dtype=np.float64)
        self.alpha_scale = float(alpha_scale)
        self.coefficients = np.asarray(coefficients, dtype=np.float64)
        w = self.direction.shape[0]
        if self.complement.shape != (w - 1, w):
            raise ValueError("complement shape does not match direction")
        if self.coefficients.shape[1] != w - 1:
            raise ValueError("one coefficient column per residual coordinate")
        if not self.alpha_scale > 0:
            raise ValueError("alpha_scale must be positive")

    @property
    def degree(self) -> int:
        return self.coefficients.shape[0] - 1

    def mean_path(self, alpha):
        """Polynomial offset f(alpha), shape (n, w-1)."""
        s = np.asarray(alpha, dtype=np.float64) / self.alpha_scale
        design = np.vander(s, self.coefficients.shape[0], increasing=True)
        return design @ self.coefficients


class PpaModel:
    """Fitted polynomial deflation sequence.

    degree is the requested polynomial degree; individual stages may hold
    fewer coefficients after a rank-deficiency fallback.
    """

    def __init__(self, mean, stages, degree=DEFAULT_DEGREE):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.stages = list(stages)
        self.degree = int(degree)
        if len(self.stages) != max(self.mean.shape[0] - 1, 0):
            raise ValueError(
                f"expected {self.mean.shape[0] - 1} stages, got {len(self.stages)}"
            )

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    def _check_width(self, x, width, name):
        x = as_matrix(x, name)
        if x.shape[1] != width:
            raise ValueError(f"{name} has {x.shape[1]} columns, expected {width}")
        return x

    def _forward_stages(self, x, n_stages):
        """Run the first n_stages deflations; return (alphas, residual)."""
        current = x - self.mean
        alphas = []
        for stage in self.stages[:n_stages]:
            alpha = current @ stage.direction
            residual = current @ stage.complement.T
            current = residual - stage.mean_path(alpha)
            alphas.append(alpha)
        return alphas, current

    def _invert_stages(self, alphas, residual):
        current = residual
        for stage, alpha in zip(reversed(self.stages[: len(alphas)]), reversed(alphas)):
            shifted = current + stage.mean_path(alpha)
            current = np.outer(alpha, stage.direction) + shifted @ stage.complement
        return current + self.mean

    def transform(self, x):
        """Curve parameters followed by the final residual coordinate."""
        x = self._check_width(x, self.d, "x")
        alphas, residual = self._forward_stages(x, len(self.stages))
        return np.column_stack(alphas + [residual]) if alphas else residual.copy()

    def inverse_transform(self, y):
        y = self._check_width(y, self.d, "y")
        alphas = [y[:, i] for i in range(len(self.stages))]
        residual = y[:, len(self.stages):].copy()
        return self._invert_stages(alphas, residual)

    def reconstruct(self, x, k):
        """Reconstruction from the first k coordinates (mean-path fill)."""
        if not 1 <= k <= self.d:
            raise ValueError(f"k must be in [1, {self.d}], got {k}")
        x = self._check_width(x, self.d, "x")
        n_stages = min(k, len(self.stages))
        alphas, residual = self._forward_stages(x, n_stages)
        if k < self.d:
            residual = np.zeros_like(residual)
        return self._invert_stages(alphas, residual)


def _fit_polynomial(alpha, targets, degree):
    """Least-squares polynomial per target column, with degree fallback.

    The projection is rescaled to roughly unit range before building the
    Vandermonde design.  A rank-deficient design (constant projections,
    too few rows) drops the degree to the achievable rank and warns.
    """
    scale = float(np.max(np.abs(alpha)))
    if scale == 0:
        scale = 1.0
    s = alpha / scale
    deg = degree
    while True:
        design = np.vander(s, deg + 1, increasing=True)
        coef, _, rank, _ = np.linalg.lstsq(design, targets, rcond=None)
        if rank == deg + 1 or deg == 0:
            break
        warnings.warn(
            f"polynomial design is rank deficient ({rank} < {deg + 1}); "
            f"reducing degree to {rank - 1}",
            RuntimeWarning,
            stacklevel=3,
        )
        deg = rank - 1
    return scale, coef


def _stage_basis(data):
    """Principal directions of zero-mean stage data, variance-descending."""
    n = data.shape[0]
    cov = (data.T @ data) / max(n - 1, 1)
    eigenvalues, vectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    basis = vectors[:, order].T.copy()
    for row in basis:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return basis


def fit_ppa(x, degree=DEFAULT_DEGREE) -> PpaModel:
    """Fit the deflation sequence with per-stage polynomial degree."""
    x = as_matrix(x, "x")
    if degree < 0:
        raise ValueError(f"degree must be non-negative, got {degree}")
    mean = x.mean(axis=0)
    current = x - mean
    stages = []
    for _ in range(x.shape[1] - 1):
        basis = _stage_basis(current)
        direction, complement = basis[0], basis[1:]
        alpha = current @ direction
        residual = current @ complement.T
        scale, coef = _fit_polynomial(alpha, residual, degree)
        stages.append(PpaStage(direction, complement, scale, coef))
        current = residual - stages[-1].mean_path(alpha)
    return PpaModel(mean, stages, degree)
