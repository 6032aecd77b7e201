# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled pairwise-distance routine behind drr.kernels.

The O(n*m*p) distance accumulation is the hot loop worth compiling; the
exponential on top of it is applied with NumPy's vectorized exp, which
outruns a scalar libc exp loop. The NumPy implementation in drr.kernels
is the reference and the fallback. Loop order is fixed, so results are
deterministic regardless of thread count.
"""

from cython.parallel cimport prange

import numpy as np


def sq_dists(double[:, ::1] a, double[:, ::1] b):
    """Pairwise squared Euclidean distances, shape (a.rows, b.rows)."""
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], p = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double s, diff
    out_arr = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for i in prange(n, schedule="static"):
            for j in range(m):
                s = 0.0
                for k in range(p):
                    diff = a[i, k] - b[j, k]
                    s = s + diff * diff
                out[i, j] = s
    return out_arr
