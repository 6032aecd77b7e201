"""Principal component analysis via eigendecomposition of the covariance.

Dimensions in the target workloads stay small (d <= a few hundred), so the
d x d covariance route is exact and cheap.  The basis rows carry a
deterministic sign convention: the largest-magnitude entry of each
direction is positive, which makes fitted models reproducible.
"""

import numpy as np

from .data import as_matrix


class PcaModel:
    """Orthonormal PCA transform.

    Attributes
    ----------
    mean : (d,) column means of the training data.
    basis : (d, d) matrix whose ROWS are principal directions, ordered by
        decreasing explained variance.
    eigenvalues : (d,) non-negative, non-increasing sample variances along
        the basis directions.
    """

    def __init__(self, mean, basis, eigenvalues):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.basis = np.asarray(basis, dtype=np.float64)
        self.eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
        d = self.mean.shape[0]
        if self.basis.shape != (d, d) or self.eigenvalues.shape != (d,):
            raise ValueError("inconsistent PCA model shapes")

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    def _check_width(self, x, expected, what):
        if x.shape[1] != expected:
            raise ValueError(
                f"{what} has {x.shape[1]} columns, model expects {expected}"
            )

    def transform(self, x):
        """Scores of x: (x - mean) projected onto the basis rows."""
        x = as_matrix(x)
        self._check_width(x, self.d, "input")
        return (x - self.mean) @ self.basis.T

    def inverse_transform(self, scores):
        scores = as_matrix(scores, "scores")
        self._check_width(scores, self.d, "scores")
        return scores @ self.basis + self.mean

    def reconstruct(self, x, k):
        """Reconstruction after keeping only the first k scores."""
        if not 1 <= k <= self.d:
            raise ValueError(f"k must lie in [1, {self.d}], got {k}")
        scores = self.transform(x)
        scores[:, k:] = 0.0
        return self.inverse_transform(scores)


def fit_pca(x) -> PcaModel:
    """Fit PCA on rows of x.

    The covariance uses the N-1 divisor (N=1 degenerates to a zero matrix
    and all-zero eigenvalues).  Tiny negative eigenvalues from rounding are
    clipped to zero.
    """
    x = as_matrix(x)
    n = x.shape[0]
    mean = x.mean(axis=0)
    xc = x - mean
    cov = (xc.T @ xc) / max(n - 1, 1)
    eigenvalues, vectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.maximum(eigenvalues[order], 0.0)
    basis = vectors[:, order].T
    # Deterministic sign: largest-|entry| of each direction made positive.
    for row in basis:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PcaModel(mean, basis, eigenvalues)
