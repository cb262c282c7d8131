"""Time the numba and numpy quadrature kernels on the same workloads.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 20000]

Prints one line per (kernel, backend) with the best time, and checks that
both backends return the same numbers.
"""
import argparse
import time

import numpy as np

from depsum import _kernels
from depsum.continuous import integrate_segments, random_basis
from depsum.core import case_rng


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads(size):
    rng = np.random.default_rng(0)
    kinds = np.array([0, 1, 2, 3, 0], dtype=np.int64)
    params = np.array([3.0, 1.5, 0.7, -0.4, 2.0])
    coefs = rng.uniform(-1, 1, kinds.shape[0])
    t = np.linspace(-3, 3, size)
    a = rng.uniform(-2, 0, size)
    b = a + rng.uniform(0.01, 1, size)
    f = lambda x: np.sin(3 * x) + x ** 2
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    flm, frm = f(0.5 * (a + m)), f(0.5 * (m + b))
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    tol = np.full(size, 1e-9)
    fam = random_basis(case_rng(0, "bench"))
    lo = np.zeros(200)
    hi = np.linspace(0.1, 4, 200)
    return {
        "basis_eval": lambda: _kernels.basis_eval(kinds, params, coefs, t),
        "simpson_refine": lambda: _kernels.simpson_refine(a, b, fa, fm, fb, flm, frm, whole, tol)[0],
        "integrate_200_segments": lambda: integrate_segments(fam.values, lo, hi),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=20000)
    args = ap.parse_args()
    results = {}
    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    for name in backends:
        _kernels.set_backend(name)
        for kernel, fn in workloads(args.size).items():
            fn()   # warm up (compiles the numba version)
            t, out = _best(fn, args.repeat)
            results[(kernel, name)] = out
            print(f"{kernel:<24} {name:<6} {t * 1e3:9.3f} ms")
    if len(backends) == 2:
        for kernel in sorted({k for k, _ in results}):
            diff = float(np.max(np.abs(results[(kernel, "numpy")] - results[(kernel, "numba")])))
            print(f"{kernel:<24} max |numpy - numba| = {diff:.2e}")


if __name__ == "__main__":
    main()
