#!/usr/bin/env python
"""Timing comparison between the compiled kernel core and the numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--sizes 200,500,1000,2000] [--dim 10]
                                       [--repeats 5] [--sigma 1.0]

The dispatching functions (sq_dists, kernel_matrix, kernel_dot) use the
compiled extension when it imported cleanly; the *_numpy variants are the
pure-numpy reference implementations.  Set DRR_DISABLE_EXTENSION=1 in the
environment before launching to force the dispatchers onto the numpy path,
which should bring every speedup close to 1.0x.
"""

import argparse
import time

import numpy as np

from drr.kernels import (
    backend_name,
    kernel_dot,
    kernel_matrix,
    rbf_kernel_dot_numpy,
    rbf_kernel_numpy,
    sq_dists,
    sq_dists_numpy,
)


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="200,500,1000,2000")
    parser.add_argument("--dim", type=int, default=10)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--sigma", type=float, default=1.0)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]

    print(f"active backend: {backend_name()}")
    print(f"{'function':16s} {'n':>6s} {'dispatch':>12s} {'numpy':>12s} {'speedup':>8s}")
    rng = np.random.default_rng(0)
    for n in sizes:
        a = rng.standard_normal((n, args.dim))
        b = rng.standard_normal((n, args.dim))
        w = rng.standard_normal(n)
        cases = [
            ("sq_dists", lambda: sq_dists(a, b), lambda: sq_dists_numpy(a, b)),
            (
                "kernel_matrix",
                lambda: kernel_matrix(a, b, args.sigma),
                lambda: rbf_kernel_numpy(a, b, args.sigma),
            ),
            (
                "kernel_dot",
                lambda: kernel_dot(a, b, args.sigma, w),
                lambda: rbf_kernel_dot_numpy(a, b, args.sigma, w),
            ),
        ]
        for name, fast, ref in cases:
            if not np.allclose(fast(), ref(), atol=1e-10):
                raise SystemExit(f"{name}: backends disagree at n={n}")
            t_fast = best_of(fast, args.repeats)
            t_ref = best_of(ref, args.repeats)
            print(
                f"{name:16s} {n:6d} {t_fast * 1e3:10.3f} ms {t_ref * 1e3:10.3f} ms"
                f" {t_ref / t_fast:7.2f}x"
            )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
