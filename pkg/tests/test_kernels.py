"""Squared-exponential kernel evaluation and backend selection."""

import os
import subprocess
import sys

import numpy as np
import pytest

from drr.kernels import (
    backend_name,
    kernel_dot,
    kernel_matrix,
    rbf_kernel_dot_numpy,
    rbf_kernel_numpy,
    sq_dists,
    sq_dists_numpy,
)


def test_zero_distance_entry_is_one():
    # The numpy backend expands ||a-b||^2, so the self-distance carries a
    # one-ulp residue; only rounding-level deviation from 1 is allowed.
    z = np.array([[0.3, -1.2]])
    assert kernel_matrix(z, z, sigma=0.7)[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_plug_in_value():
    # Distance sigma*sqrt(2) gives exp(-1) exactly by the kernel formula.
    sigma = 0.9
    z1 = np.zeros((1, 3))
    z2 = np.array([[sigma * np.sqrt(2.0), 0.0, 0.0]])
    k = kernel_matrix(z1, z2, sigma)
    assert abs(k[0, 0] - np.exp(-1.0)) < 1e-12


def test_large_sigma_limit():
    rng = np.random.default_rng(0)
    z = rng.standard_normal((20, 4)) * 5
    k = kernel_matrix(z, z, sigma=1e8)
    assert np.max(np.abs(k - 1.0)) < 1e-6


def test_entries_in_unit_interval():
    rng = np.random.default_rng(1)
    z1 = rng.standard_normal((30, 3))
    z2 = rng.standard_normal((40, 3))
    k = kernel_matrix(z1, z2, sigma=0.5)
    assert np.all(k > 0.0)
    assert np.all(k <= 1.0)


def test_symmetric_positive_semidefinite():
    rng = np.random.default_rng(2)
    for _ in range(5):
        n = int(rng.integers(2, 200))
        p = int(rng.integers(1, 10))
        z = rng.standard_normal((n, p))
        k = kernel_matrix(z, z, sigma=float(rng.uniform(0.2, 3.0)))
        assert np.max(np.abs(k - k.T)) < 1e-12
        assert np.linalg.eigvalsh(k).min() >= -1e-8


def test_sq_dists_matches_direct():
    rng = np.random.default_rng(3)
    z1 = rng.standard_normal((15, 4))
    z2 = rng.standard_normal((9, 4))
    direct = ((z1[:, None, :] - z2[None, :, :]) ** 2).sum(axis=2)
    assert np.allclose(sq_dists(z1, z2), direct, atol=1e-10)
    assert np.all(sq_dists(z1, z1) >= 0.0)


def test_kernel_dot_matches_matmul():
    rng = np.random.default_rng(4)
    z1 = rng.standard_normal((12, 3))
    z2 = rng.standard_normal((7, 3))
    w = rng.standard_normal(7)
    expected = kernel_matrix(z1, z2, 0.8) @ w
    assert np.allclose(kernel_dot(z1, z2, 0.8, w), expected, atol=1e-12)
    w2 = rng.standard_normal((7, 2))
    expected2 = kernel_matrix(z1, z2, 0.8) @ w2
    out2 = kernel_dot(z1, z2, 0.8, w2)
    assert out2.shape == (12, 2)
    assert np.allclose(out2, expected2, atol=1e-12)


def test_validation_errors():
    z = np.zeros((2, 3))
    with pytest.raises(ValueError, match="sigma must be positive"):
        kernel_matrix(z, z, 0.0)
    with pytest.raises(ValueError, match="column count mismatch"):
        kernel_matrix(z, np.zeros((2, 4)), 1.0)
    with pytest.raises(ValueError, match="weights has 3 rows, expected 2"):
        kernel_dot(z, z, 1.0, np.zeros(3))
    with pytest.raises(ValueError, match="2-d"):
        kernel_matrix(np.zeros(3), z, 1.0)


def test_backends_agree():
    # The dispatching functions and the reference implementations must match
    # whichever backend is active.
    rng = np.random.default_rng(5)
    z1 = rng.standard_normal((25, 6))
    z2 = rng.standard_normal((18, 6))
    w = rng.standard_normal((18, 3))
    assert np.allclose(sq_dists(z1, z2), sq_dists_numpy(z1, z2), atol=1e-12)
    assert np.allclose(
        kernel_matrix(z1, z2, 0.6), rbf_kernel_numpy(z1, z2, 0.6), atol=1e-12
    )
    assert np.allclose(
        kernel_dot(z1, z2, 0.6, w), rbf_kernel_dot_numpy(z1, z2, 0.6, w), atol=1e-12
    )


def test_backend_name_valid():
    assert backend_name() in ("compiled", "numpy")


def test_disable_extension_env_var():
    # A fresh interpreter with DRR_DISABLE_EXTENSION set must pick numpy.
    env = dict(os.environ, DRR_DISABLE_EXTENSION="1")
    out = subprocess.run(
        [sys.executable, "-c", "import drr; print(drr.backend_name())"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_non_contiguous_input_accepted():
    rng = np.random.default_rng(6)
    z = rng.standard_normal((10, 8))[:, ::2]
    assert not z.flags.c_contiguous
    k = kernel_matrix(z, z, 1.0)
    assert np.allclose(np.diag(k), 1.0)
