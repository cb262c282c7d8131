"""Hot loops of the quadrature engine.

Each kernel has a numba-compiled version and a pure numpy version with the
same signature.  ``DEPSUM_KERNEL=numpy`` forces the numpy path; the default
uses numba when it imports.
"""
from __future__ import annotations

import logging
import os

import numpy as np

log = logging.getLogger(__name__)

MONO, COS, SIN, EXP = 0, 1, 2, 3

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    HAVE_NUMBA = False


# numpy versions

def basis_eval_numpy(kinds, params, coefs, t):
    out = np.zeros(t.shape[0])
    for k in range(kinds.shape[0]):
        kind, p, c = kinds[k], params[k], coefs[k]
        if kind == MONO:
            out += c * t ** int(p)
        elif kind == COS:
            out += c * np.cos(p * t)
        elif kind == SIN:
            out += c * np.sin(p * t)
        else:
            out += c * np.exp(p * t)
    return out


def simpson_refine_numpy(a, b, fa, fm, fb, flm, frm, whole, tol):
    """Split each panel once; return (refined estimate, accepted mask)."""
    h = (b - a) / 12.0
    left = h * (fa + 4.0 * flm + fm)
    right = h * (fm + 4.0 * frm + fb)
    err = left + right - whole
    ok = np.abs(err) <= 15.0 * tol
    return left + right + err / 15.0, ok, left, right


# numba versions

if HAVE_NUMBA:
    @numba.njit(cache=True)
    def basis_eval_numba(kinds, params, coefs, t):
        n = t.shape[0]
        out = np.zeros(n)
        for k in range(kinds.shape[0]):
            kind, p, c = kinds[k], params[k], coefs[k]
            for i in range(n):
                x = t[i]
                if kind == MONO:
                    v = 1.0
                    for _ in range(int(p)):
                        v *= x
                    out[i] += c * v
                elif kind == COS:
                    out[i] += c * np.cos(p * x)
                elif kind == SIN:
                    out[i] += c * np.sin(p * x)
                else:
                    out[i] += c * np.exp(p * x)
        return out

    @numba.njit(cache=True)
    def simpson_refine_numba(a, b, fa, fm, fb, flm, frm, whole, tol):
        n = a.shape[0]
        est = np.empty(n)
        ok = np.empty(n, dtype=np.bool_)
        left = np.empty(n)
        right = np.empty(n)
        for i in range(n):
            h = (b[i] - a[i]) / 12.0
            lv = h * (fa[i] + 4.0 * flm[i] + fm[i])
            rv = h * (fm[i] + 4.0 * frm[i] + fb[i])
            e = lv + rv - whole[i]
            est[i] = lv + rv + e / 15.0
            ok[i] = abs(e) <= 15.0 * tol[i]
            left[i] = lv
            right[i] = rv
        return est, ok, left, right
else:  # pragma: no cover
    basis_eval_numba = basis_eval_numpy
    simpson_refine_numba = simpson_refine_numpy


_IMPLS = {
    "numpy": (basis_eval_numpy, simpson_refine_numpy),
    "numba": (basis_eval_numba, simpson_refine_numba),
}


def _initial_backend() -> str:
    want = os.environ.get("DEPSUM_KERNEL", "numba").strip().lower()
    if want not in _IMPLS:
        log.warning("unknown DEPSUM_KERNEL=%r, using numpy", want)
        return "numpy"
    if want == "numba" and not HAVE_NUMBA:
        log.warning("numba not importable, using the numpy kernels")
        return "numpy"
    return want


_backend = _initial_backend()


def backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Switch kernels at runtime; returns the previous backend name."""
    global _backend
    if name not in _IMPLS:
        raise ValueError(f"unknown kernel backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not available")
    prev, _backend = _backend, name
    return prev


def basis_eval(kinds, params, coefs, t):
    return _IMPLS[_backend][0](kinds, params, coefs, t)


def simpson_refine(a, b, fa, fm, fb, flm, frm, whole, tol):
    return _IMPLS[_backend][1](a, b, fa, fm, fb, flm, frm, whole, tol)
