import os
import subprocess
import sys

import numpy as np
import pytest

from depsum import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def _basis_inputs(seed=0, n=500):
    rng = np.random.default_rng(seed)
    kinds = np.array([0, 0, 1, 2, 3, 0], dtype=np.int64)
    params = np.array([0.0, 5.0, 3.0, 1.5, -0.7, 2.0])
    coefs = rng.uniform(-2, 2, kinds.shape[0])
    t = rng.uniform(-3, 3, n)
    return kinds, params, coefs, t


@needs_numba
def test_basis_eval_agrees():
    args = _basis_inputs()
    assert np.allclose(_kernels.basis_eval_numpy(*args), _kernels.basis_eval_numba(*args), rtol=1e-13, atol=1e-13)


@needs_numba
def test_simpson_refine_agrees():
    rng = np.random.default_rng(1)
    n = 300
    a = rng.uniform(-1, 0, n)
    b = a + rng.uniform(0.01, 1, n)
    vals = [rng.normal(size=n) for _ in range(6)]
    tol = np.full(n, 1e-3)
    slow = _kernels.simpson_refine_numpy(a, b, *vals, tol)
    fast = _kernels.simpson_refine_numba(a, b, *vals, tol)
    for x, y in zip(slow, fast):
        if x.dtype == bool:
            assert np.array_equal(x, y)
        else:
            assert np.allclose(x, y, rtol=1e-14, atol=1e-14)


def test_set_backend_round_trip():
    prev = _kernels.set_backend("numpy")
    try:
        assert _kernels.backend() == "numpy"
        with pytest.raises(ValueError):
            _kernels.set_backend("fortran")
    finally:
        _kernels.set_backend(prev)
    assert _kernels.backend() == prev


def test_env_flag_selects_numpy():
    env = dict(os.environ, DEPSUM_KERNEL="numpy")
    out = subprocess.run([sys.executable, "-c", "from depsum import _kernels; print(_kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
