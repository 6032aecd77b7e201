"""Squared-exponential kernel evaluation with a compiled fast path.

Two interchangeable backends compute the pairwise squared distances that
dominate the cost:

* ``drr._kernel_core`` -- Cython extension, used when it was built and the
  environment variable ``DRR_DISABLE_EXTENSION`` is unset;
* the NumPy implementations below, always available.

The exponential on top of the distances is always NumPy's vectorized exp;
a scalar exp loop in the extension measured slower.  The active backend is
chosen once at import time so every computation in a process goes through
the same code path.  ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

import numpy as np

try:
    from . import _kernel_core
except ImportError:
    _kernel_core = None

_use_ext = _kernel_core is not None and not os.environ.get("DRR_DISABLE_EXTENSION")


def backend_name() -> str:
    """Name of the active backend: 'compiled' or 'numpy'."""
    return "compiled" if _use_ext else "numpy"


def _as_c_matrix(z, name):
    z = np.ascontiguousarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got shape {z.shape}")
    return z


def _check_pair(z1, z2):
    z1 = _as_c_matrix(z1, "z1")
    z2 = _as_c_matrix(z2, "z2")
    if z1.shape[1] != z2.shape[1]:
        raise ValueError(
            f"column count mismatch: {z1.shape[1]} vs {z2.shape[1]}"
        )
    return z1, z2


def _check_sigma(sigma):
    sigma = float(sigma)
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return sigma


def sq_dists_numpy(z1, z2):
    n1 = np.einsum("ij,ij->i", z1, z1)
    n2 = np.einsum("ij,ij->i", z2, z2)
    d = n1[:, None] + n2[None, :] - 2.0 * (z1 @ z2.T)
    np.maximum(d, 0.0, out=d)
    return d


def rbf_kernel_numpy(z1, z2, sigma):
    k = sq_dists_numpy(z1, z2)
    k *= -0.5 / (sigma * sigma)
    np.exp(k, out=k)
    return k


def rbf_kernel_dot_numpy(z1, z2, sigma, weights):
    return rbf_kernel_numpy(z1, z2, sigma) @ weights


def sq_dists(z1, z2):
    """Pairwise squared Euclidean distances between rows of z1 and z2."""
    z1, z2 = _check_pair(z1, z2)
    if _use_ext:
        return _kernel_core.sq_dists(z1, z2)
    return sq_dists_numpy(z1, z2)


def kernel_matrix(z1, z2, sigma):
    """Squared-exponential kernel matrix K[i, j] = exp(-||z1_i - z2_j||^2 / (2 sigma^2)).

    Entries lie in (0, 1].  Raises ValueError for sigma <= 0 or mismatched
    column counts.
    """
    z1, z2 = _check_pair(z1, z2)
    sigma = _check_sigma(sigma)
    if _use_ext:
        k = _kernel_core.sq_dists(z1, z2)
        k *= -0.5 / (sigma * sigma)
        np.exp(k, out=k)
        return k
    return rbf_kernel_numpy(z1, z2, sigma)


def kernel_dot(z1, z2, sigma, weights):
    """kernel_matrix(z1, z2, sigma) @ weights.

    weights may be a vector of length z2.rows or a matrix with that many
    rows; the result has matching trailing shape.
    """
    z1, z2 = _check_pair(z1, z2)
    sigma = _check_sigma(sigma)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    squeeze = w.ndim == 1
    if squeeze:
        w = w[:, None]
    if w.shape[0] != z2.shape[0]:
        raise ValueError(
            f"weights has {w.shape[0]} rows, expected {z2.shape[0]}"
        )
    out = kernel_matrix(z1, z2, sigma) @ w
    return out[:, 0] if squeeze else out
