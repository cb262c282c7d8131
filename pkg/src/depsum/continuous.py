"""Analytic adders: sums are integrals.

Families are real functions built from a small basis (monomials, cos, sin,
exp) and closed under the operations the axioms need (boxtimes, scaling,
substitution).  Every sum is computed by batched adaptive Simpson
quadrature; closed-form antiderivatives of the basis are kept as an
independent oracle.  The complex adder integrates polynomials along paths.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import COS, EXP, MONO, SIN
from .core import (
    AdderInstance,
    CheckResult,
    EqualityNotion,
    Family,
    FiberDescriptor,
    FlatPair,
    LeftModuleInstance,
    RightModuleInstance,
    Skip,
    _num_close,
    drive_cases,
    failure_record,
)

DEFAULT_TOL = 1e-7
CHECK_GRID = 35


# quadrature engine

@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "adaptive-simpson"
    abs_tol: float = 1e-9
    max_depth: int = 40

    def __post_init__(self):
        if self.method != "adaptive-simpson":
            raise ValueError(f"unsupported quadrature method {self.method!r}")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")


DEFAULT_SPEC = QuadratureSpec()


class QuadratureError(ArithmeticError):
    """Refinement hit max_depth; ``intervals`` lists the unresolved panels."""

    def __init__(self, msg, intervals):
        super().__init__(msg)
        self.intervals = intervals


def _refine(a, b, fa, fm, fb, flm, frm, whole, tol):
    if np.iscomplexobj(fa) or np.iscomplexobj(flm):
        er, okr, lr, rr = _kernels.simpson_refine(a, b, fa.real, fm.real, fb.real, flm.real, frm.real,
                                                  whole.real, tol)
        ei, oki, li, ri = _kernels.simpson_refine(a, b, fa.imag, fm.imag, fb.imag, flm.imag, frm.imag,
                                                  whole.imag, tol)
        return er + 1j * ei, okr & oki, lr + 1j * li, rr + 1j * ri
    return _kernels.simpson_refine(a, b, fa, fm, fb, flm, frm, whole, tol)


def integrate_segments(fn, lo, hi, spec: QuadratureSpec = DEFAULT_SPEC, segmented: bool = False,
                       tol=None) -> np.ndarray:
    """Signed integrals of ``fn`` over each [lo[k], hi[k]], all refined together.

    ``fn`` takes a 1-d array of nodes (and, when ``segmented``, the matching
    segment indices) and returns values of the same length.  ``tol`` is the
    per-segment absolute tolerance; it defaults to ``spec.abs_tol``.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    nseg = lo.shape[0]
    if nseg == 0:
        return np.zeros(0)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("integration bounds must be finite")
    sign = np.where(hi >= lo, 1.0, -1.0)
    a0, b0 = np.minimum(lo, hi), np.maximum(lo, hi)
    seg_tol = np.full(nseg, spec.abs_tol) if tol is None else np.broadcast_to(np.asarray(tol, float), (nseg,))

    def call(t, seg):
        v = fn(t, seg) if segmented else fn(t)
        v = np.asarray(v)
        if v.shape != t.shape:
            v = np.broadcast_to(v, t.shape).copy()
        if not np.all(np.isfinite(v)):
            raise QuadratureError("integrand is not finite on the interval", [])
        return v

    panels = 4
    frac = np.arange(panels + 1) / panels
    edges = a0[:, None] + (b0 - a0)[:, None] * frac[None, :]
    a = edges[:, :-1].ravel()
    b = edges[:, 1:].ravel()
    seg = np.repeat(np.arange(nseg), panels)
    ptol = np.repeat(seg_tol / panels, panels)
    m = 0.5 * (a + b)
    vals = call(np.concatenate([a, m, b]), np.concatenate([seg, seg, seg]))
    n = a.shape[0]
    fa, fm, fb = vals[:n], vals[n:2 * n], vals[2 * n:]
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = np.zeros(nseg, dtype=vals.dtype)
    depth = 0
    while a.shape[0]:
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        mid = call(np.concatenate([lm, rm]), np.concatenate([seg, seg]))
        k = a.shape[0]
        flm, frm = mid[:k], mid[k:]
        est, ok, left, right = _refine(a, b, fa, fm, fb, flm, frm, whole, ptol)
        if depth >= spec.max_depth and not np.all(ok):
            bad = [(float(x), float(y)) for x, y in zip(a[~ok][:5], b[~ok][:5])]
            raise QuadratureError(f"adaptive Simpson exceeded max_depth={spec.max_depth}", bad)
        if np.any(ok):
            if np.iscomplexobj(est):
                total += (np.bincount(seg[ok], weights=est[ok].real, minlength=nseg)
                          + 1j * np.bincount(seg[ok], weights=est[ok].imag, minlength=nseg))
            else:
                total += np.bincount(seg[ok], weights=est[ok], minlength=nseg)
        r = ~ok
        a, m_, b = a[r], m[r], b[r]
        fa, fm, fb, flm, frm = fa[r], fm[r], fb[r], flm[r], frm[r]
        left, right, ptol, seg = left[r], right[r], ptol[r] / 2.0, seg[r]
        a, b = np.concatenate([a, m_]), np.concatenate([m_, b])
        fa, fb, fm = np.concatenate([fa, fm]), np.concatenate([fm, fb]), np.concatenate([flm, frm])
        whole = np.concatenate([left, right])
        ptol, seg = np.concatenate([ptol, ptol]), np.concatenate([seg, seg])
        m = 0.5 * (a + b)
        depth += 1
    return sign * total


def integrate(f, a: float, b: float, spec: QuadratureSpec = DEFAULT_SPEC):
    """Integral of ``f`` over [a, b] (signed)."""
    fn = f.values if isinstance(f, Fn) else (lambda t: np.asarray(f(t)))
    return integrate_segments(fn, [a], [b], spec)[0].item()


def cumint(f, t, spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    """Integrals of ``f`` from 0 to each entry of ``t``.

    The nodes are sorted and consecutive gaps integrated together; each gap
    gets a tolerance proportional to its length.
    """
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    pts = np.unique(np.concatenate([flat, [0.0]]))
    if pts.shape[0] == 1:
        return np.zeros_like(t)
    gaps = np.diff(pts)
    span = pts[-1] - pts[0]
    fn = f.values if isinstance(f, Fn) else f
    parts = integrate_segments(fn, pts[:-1], pts[1:], spec, tol=np.maximum(spec.abs_tol * gaps / span, 1e-15))
    cum = np.concatenate([[0.0], np.cumsum(parts)])
    z = np.searchsorted(pts, 0.0)
    return (cum - cum[z])[np.searchsorted(pts, flat)].reshape(t.shape)


# real functions

class Fn:
    """A real function of one variable, evaluated on numpy arrays."""

    def values(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        out = self.values(np.atleast_1d(arr).ravel())
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def to_json(self):
        return {"fn": type(self).__name__}


_KIND_CODE = {"mono": MONO, "cos": COS, "sin": SIN, "exp": EXP}
_KIND_NAME = {v: k for k, v in _KIND_CODE.items()}


class AnalyticFamily(Fn):
    """Finite combination of t^k (k <= 6), cos(m t), sin(m t), exp(c t) (|c| <= 1)."""

    MAX_MONO = 6

    def __init__(self, terms):
        clean = []
        for kind, param, coef in terms:
            if kind not in _KIND_CODE:
                raise ValueError(f"unknown basis term {kind!r}")
            param, coef = float(param), float(coef)
            if kind == "mono" and (param != int(param) or not 0 <= param <= self.MAX_MONO):
                raise ValueError(f"monomial degree must be an integer in 0..{self.MAX_MONO}")
            if kind == "exp" and abs(param) > 1:
                raise ValueError("exp rate must satisfy |c| <= 1")
            if coef != 0.0:
                clean.append((kind, param, coef))
        self.terms = tuple(clean)
        self._kinds = np.array([_KIND_CODE[k] for k, _, _ in clean], dtype=np.int64)
        self._params = np.array([p for _, p, _ in clean], dtype=float)
        self._coefs = np.array([c for _, _, c in clean], dtype=float)

    @classmethod
    def const(cls, c: float) -> "AnalyticFamily":
        return cls([("mono", 0, c)])

    def values(self, t):
        if not self.terms:
            return np.zeros(t.shape[0])
        return _kernels.basis_eval(self._kinds, self._params, self._coefs, np.ascontiguousarray(t, dtype=float))

    def affine(self, alpha: float, beta: float) -> "AnalyticFamily":
        """alpha + beta * self."""
        return AnalyticFamily([("mono", 0, alpha)] + [(k, p, beta * c) for k, p, c in self.terms])

    def antiderivative(self, t):
        """Closed form of the integral from 0 to t (the oracle route)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for kind, p, c in self.terms:
            if kind == "mono":
                out = out + c * t ** (int(p) + 1) / (int(p) + 1)
            elif kind == "cos":
                out = out + (c * np.sin(p * t) / p if p else c * t)
            elif kind == "sin":
                out = out + (c * (1.0 - np.cos(p * t)) / p if p else 0.0 * t)
            else:
                out = out + (c * np.expm1(p * t) / p if p else c * t)
        return float(out) if out.ndim == 0 else out

    def exact_integral(self, a: float, b: float) -> float:
        return self.antiderivative(b) - self.antiderivative(a)

    def derivative(self) -> "AnalyticFamily":
        out = []
        for kind, p, c in self.terms:
            if kind == "mono" and p >= 1:
                out.append(("mono", p - 1, c * p))
            elif kind == "cos":
                out.append(("sin", p, -c * p))
            elif kind == "sin":
                out.append(("cos", p, c * p))
            elif kind == "exp":
                out.append(("exp", p, c * p))
        return AnalyticFamily(out)

    def lipschitz(self, lo: float, hi: float) -> float:
        """Upper bound for |f'| on [lo, hi]."""
        r = max(abs(lo), abs(hi))
        bound = 0.0
        for kind, p, c in self.terms:
            if kind == "mono":
                k = int(p)
                bound += abs(c) * k * r ** (k - 1) if k else 0.0
            elif kind in ("cos", "sin"):
                bound += abs(c * p)
            else:
                bound += abs(c * p) * math.exp(abs(p) * r)
        return bound

    def to_json(self):
        return {"basis": [[k, p, c] for k, p, c in self.terms]}

    def __repr__(self):
        return f"AnalyticFamily({list(self.terms)})"


class BoxFamily(Fn):
    """t -> f(t) * g(integral of f from 0 to t)."""

    def __init__(self, f: Fn, g: Fn, spec: QuadratureSpec = DEFAULT_SPEC):
        self.f, self.g, self.spec = f, g, spec

    def values(self, t):
        return self.f.values(t) * self.g.values(cumint(self.f, t, self.spec))

    def to_json(self):
        return {"op": "boxtimes", "f": self.f.to_json(), "g": self.g.to_json()}


class ScaledFamily(Fn):
    def __init__(self, f: Fn, c: float):
        self.f, self.c = f, float(c)

    def values(self, t):
        return self.c * self.f.values(t)

    def to_json(self):
        return {"op": "scale", "c": self.c, "f": self.f.to_json()}


class SubstFamily(Fn):
    """t -> f(h(t)) * h'(t)."""

    def __init__(self, f: Fn, h: AnalyticFamily):
        self.f, self.h, self.dh = f, h, h.derivative()

    def values(self, t):
        return self.f.values(self.h.values(t)) * self.dh.values(t)

    def to_json(self):
        return {"op": "substitute", "f": self.f.to_json(), "h": self.h.to_json()}


class BiFamily:
    """F(s, t) = sum c s^p t^q + d sin(e s t)."""

    def __init__(self, monos, d: float = 0.0, e: float = 0.0):
        self.monos = tuple((float(c), int(p), int(q)) for c, p, q in monos)
        self.d, self.e = float(d), float(e)

    def values(self, s, t):
        s = np.asarray(s, float)
        t = np.asarray(t, float)
        out = self.d * np.sin(self.e * s * t)
        for c, p, q in self.monos:
            out = out + c * s ** p * t ** q
        return out

    def __call__(self, pair):
        j, i = pair
        return float(self.values(j, i))

    def affine(self, alpha, beta) -> "BiFamily":
        return BiFamily([(beta * c, p, q) for c, p, q in self.monos] + [(alpha, 0, 0)], beta * self.d, self.e)

    def lipschitz(self, r: float) -> float:
        """Bound on |dF/ds| + |dF/dt| over the square [-r, r]^2."""
        b = 2 * abs(self.d * self.e) * r
        for c, p, q in self.monos:
            b += abs(c) * (p * r ** max(p - 1, 0) * r ** q + q * r ** p * r ** max(q - 1, 0))
        return b

    def to_json(self):
        return {"bivariate": [list(m) for m in self.monos], "sin": [self.d, self.e]}


class PartialFamily(Fn):
    """s -> integral over t in [0, x] of F(s, t) (axis=1), or
    t -> integral over s in [0, y] of F(s, t) (axis=0)."""

    def __init__(self, F: BiFamily, bound: float, axis: int, spec: QuadratureSpec = DEFAULT_SPEC):
        self.F, self.bound, self.axis, self.spec = F, float(bound), axis, spec

    def values(self, u):
        u = np.asarray(u, float)
        if self.axis == 1:
            fn = lambda t, seg: self.F.values(u[seg], t)  # noqa: E731
        else:
            fn = lambda s, seg: self.F.values(s, u[seg])  # noqa: E731
        return integrate_segments(fn, np.zeros_like(u), np.full_like(u, self.bound), self.spec, segmented=True)

    def to_json(self):
        return {"op": "partial", "axis": self.axis, "bound": self.bound, "F": self.F.to_json()}


# carriers, certificates and generators

@dataclass(frozen=True)
class Carrier:
    """Value range of elements and families of an analytic adder."""
    name: str
    lo: float
    hi: float
    elem_lo: float
    elem_hi: float
    target_lo: float
    target_hi: float

    def contains(self, v: float, slack: float = 1e-9) -> bool:
        return self.lo - slack <= v <= self.hi + slack


CARRIERS = {
    "rpos": Carrier("rpos", 0.0, math.inf, 0.0, 3.0, 0.05, 2.0),
    "unit": Carrier("unit", 0.0, 1.0, 0.0, 1.0, 0.02, 0.98),
    "real": Carrier("real", -math.inf, math.inf, -2.5, 2.5, -2.0, 2.0),
    "sym": Carrier("sym", -1.0, 1.0, -1.0, 1.0, -0.98, 0.98),
}
REAL_WINDOW = 6.0


def certify_range(f: AnalyticFamily, lo: float, hi: float, clo: float, chi: float, n: int = 257) -> bool:
    """Grid values plus a Lipschitz margin prove clo <= f <= chi on [lo, hi]."""
    if hi <= lo:
        v = f(lo)
        return clo <= v <= chi
    grid = np.linspace(lo, hi, n)
    vals = f.values(grid)
    margin = f.lipschitz(lo, hi) * (hi - lo) / (n - 1) / 2.0
    return float(vals.min()) - margin >= clo and float(vals.max()) + margin <= chi


def random_basis(rng: random.Random, max_mono: int = 3, max_terms: int = 3) -> AnalyticFamily:
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        kind = rng.choice(("mono", "mono", "cos", "sin", "exp"))
        if kind == "mono":
            param = rng.randint(1, max_mono)
        elif kind == "exp":
            param = rng.choice((-1.0, -0.5, 0.5, 1.0))
        else:
            param = rng.choice((0.5, 1.0, 2.0, 3.0))
        terms.append((kind, param, rng.uniform(-1.0, 1.0)))
    return AnalyticFamily(terms)


def _cert_domain(carrier: Carrier, x: float) -> tuple[float, float]:
    if carrier.name == "rpos":
        return 0.0, max(float(x), 0.0)
    if carrier.name == "real":
        return -REAL_WINDOW, REAL_WINDOW
    return carrier.elem_lo, carrier.elem_hi


def random_carrier_family(carrier: Carrier, x: float, rng: random.Random, tries: int = 20,
                          constant_prob: float = 0.1) -> AnalyticFamily:
    """Random basis family rescaled into the carrier and certified there;
    families failing the certificate are rejected, never clamped."""
    lo, hi = _cert_domain(carrier, x)
    for _ in range(tries):
        tlo = rng.uniform(carrier.target_lo, carrier.target_hi)
        thi = rng.uniform(tlo, carrier.target_hi)
        if rng.random() < constant_prob:
            f = AnalyticFamily.const(tlo)
        else:
            raw = random_basis(rng)
            vals = raw.values(np.linspace(lo, hi, 257)) if hi > lo else raw.values(np.array([lo]))
            vmin, vmax = float(vals.min()), float(vals.max())
            beta = (thi - tlo) / (vmax - vmin) if vmax - vmin > 1e-12 else 0.0
            f = raw.affine(tlo - beta * vmin, beta)
        if certify_range(f, lo, hi, carrier.lo, carrier.hi):
            return f
    raise Skip("no family passed the range certificate")


def random_carrier_element(carrier: Carrier, rng: random.Random) -> float:
    r = rng.random()
    if r < 0.05:
        return 0.0
    if r < 0.1:
        return 1.0
    if carrier.name == "real" and r < 0.15:
        return -1.0
    return rng.uniform(carrier.elem_lo, carrier.elem_hi)


def interval_fiber(x: float) -> FiberDescriptor:
    x = float(x)
    return FiberDescriptor("interval", lo=min(0.0, x), hi=max(0.0, x))


# the real adders

def real_sum(x: float, f, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Integral of f from 0 to x."""
    return integrate(f, 0.0, float(x), spec)


def real_flatten(x: float, f, pair, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """(a, b) -> integral of f from 0 to a; b plays no role."""
    a = pair.outer if isinstance(pair, FlatPair) else pair[0]
    return integrate(f, 0.0, float(a), spec)


def _fn_of(f):
    return f.data if isinstance(f, Family) and isinstance(f.data, Fn) else f


def _analytic_family(fn: Fn, domain: FiberDescriptor) -> Family:
    return Family(domain, fn, "analytic", fn)


def vector_family_equality(tol: float):
    def check(h: Family, f: Family, rng):
        grid = np.asarray(f.domain.check_points(rng), dtype=float)
        a, b = _fn_of(h).values(grid), _fn_of(f).values(grid)
        scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
        bad = np.nonzero(~(np.abs(a - b) <= tol * scale))[0]
        if bad.size:
            k = int(bad[0])
            return float(grid[k]), float(a[k]), float(b[k])
        return None
    return check


def serialize_analytic(obj):
    if isinstance(obj, Family):
        data = obj.data
        return data.to_json() if hasattr(data, "to_json") else {"family": obj.rep}
    if isinstance(obj, (Fn, BiFamily, ComplexPoly)):
        return obj.to_json()
    if isinstance(obj, np.ndarray):
        return serialize_analytic(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (list, tuple)):
        return [serialize_analytic(o) for o in obj]
    if isinstance(obj, dict):
        return {str(k): serialize_analytic(v) for k, v in obj.items()}
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def make_real_adder(kind: str = "rpos", tol: float = DEFAULT_TOL,
                    spec: QuadratureSpec = DEFAULT_SPEC) -> AdderInstance:
    """Adders on [0, inf), [0, 1], R and [-1, 1]: integrals from 0 to x."""
    carrier = CARRIERS[kind]

    def sum_op(x, f):
        return real_sum(x, _fn_of(f), spec)

    def flatten_op(x, f, pair):
        return real_flatten(x, _fn_of(f), pair, spec)

    def family_gen(x, rng):
        return _analytic_family(random_carrier_family(carrier, x, rng), interval_fiber(x))

    def boxtimes_op(x, f, g):
        return _analytic_family(BoxFamily(_fn_of(f), _fn_of(g), spec), f.domain)

    def pullback_op(x, f, g, i):
        c = _fn_of(g)(real_flatten(x, _fn_of(f), (i, None), spec))
        return _analytic_family(AnalyticFamily.const(c), interval_fiber(f(i)))

    def bifamily(x, y, rng):
        r = max(abs(x), abs(y), 1.0)
        for _ in range(20):
            monos = [(rng.uniform(-1, 1), rng.randint(0, 2), rng.randint(0, 2)) for _ in range(rng.randint(1, 3))]
            raw = BiFamily(monos, rng.uniform(-1, 1), rng.choice((0.5, 1.0, 2.0)))
            g = np.linspace(-r if carrier.lo < 0 else 0.0, r, 33)
            vals = raw.values(g[:, None], g[None, :])
            vmin, vmax = float(vals.min()), float(vals.max())
            tlo = rng.uniform(carrier.target_lo, carrier.target_hi)
            thi = rng.uniform(tlo, carrier.target_hi)
            beta = (thi - tlo) / (vmax - vmin) if vmax - vmin > 1e-12 else 0.0
            F = raw.affine(tlo - beta * vmin, beta)
            margin = F.lipschitz(r) * (g[1] - g[0])
            fv = F.values(g[:, None], g[None, :])
            if float(fv.min()) - margin >= carrier.lo and float(fv.max()) + margin <= carrier.hi:
                dom = FiberDescriptor("product", components=(interval_fiber(y), interval_fiber(x)))
                return Family(dom, F, "bivariate", F)
        raise Skip("no bivariate family passed the range certificate")

    def partial_sum(x, y, F, over):
        if over == "x":
            return _analytic_family(PartialFamily(F.data, x, axis=1, spec=spec), interval_fiber(y))
        return _analytic_family(PartialFamily(F.data, y, axis=0, spec=spec), interval_fiber(x))

    return AdderInstance(
        name=kind,
        elem_kind=f"real numbers in [{carrier.elem_lo}, {carrier.elem_hi}]"
        if kind != "rpos" else "non-negative reals",
        unit_elem=1.0,
        zero_elem=0.0,
        has_zero=True,
        fiber_of=interval_fiber,
        sum_op=sum_op,
        flatten_op=flatten_op,
        equality=EqualityNotion.epsilon(tol),
        elem_gen=lambda rng: random_carrier_element(carrier, rng),
        family_gen=family_gen,
        commutative_flag=True,
        const_family_op=lambda x, v: _analytic_family(AnalyticFamily.const(float(v)), interval_fiber(x)),
        boxtimes_op=boxtimes_op,
        pullback_op=pullback_op,
        bifamily_gen=bifamily,
        partial_sum_op=partial_sum,
        family_equality=vector_family_equality(tol),
        scale_family_op=lambda y, f: _analytic_family(ScaledFamily(_fn_of(f), float(y)), f.domain),
        serializer=serialize_analytic,
        description="continuous families summed by integrals from 0",
    )


def check_closure(adder: AdderInstance, cases: int = 200, seed: int = 0) -> CheckResult:
    """Every sum of a generated family stays inside the carrier."""
    carrier = CARRIERS[adder.name]

    def case(rng):
        x = adder.elem_gen(rng)
        f = adder.family_gen(x, rng)
        s = adder.sum_op(x, f)
        lo = carrier.elem_lo if carrier.name in ("unit", "sym") else carrier.lo
        hi = carrier.elem_hi if carrier.name in ("unit", "sym") else carrier.hi
        if not lo - 1e-9 <= s <= hi + 1e-9:
            return failure_record(adder, {"x": x, "f": f}, s, [lo, hi])
        return None
    return drive_cases("closure", adder, cases, seed, case)


def check_basis_oracle(cases: int = 200, seed: int = 0, spec: QuadratureSpec = DEFAULT_SPEC) -> CheckResult:
    """Quadrature against closed-form antiderivatives of basis families."""
    adder = make_real_adder("real")

    def case(rng):
        f = random_basis(rng, max_mono=6, max_terms=4)
        a, b = rng.uniform(-3, 3), rng.uniform(-3, 3)
        num = integrate(f, a, b, spec)
        exact = f.exact_integral(a, b)
        if abs(num - exact) > 10 * spec.abs_tol * max(1.0, abs(exact)):
            return failure_record(adder, {"f": f, "a": a, "b": b}, num, exact)
        return None
    return drive_cases("basis_oracle", adder, cases, seed, case)


def substitution_sides(f: Fn, h: AnalyticFamily, x: float, spec: QuadratureSpec = DEFAULT_SPEC):
    """(integral_0^{h(x)} f, integral_0^x f(h(t)) h'(t) dt)."""
    return integrate(f, 0.0, h(x), spec), integrate(SubstFamily(f, h), 0.0, x, spec)


def substitution_check(f: Fn, h: AnalyticFamily, x: float, tol: float = 1e-6,
                       spec: QuadratureSpec = DEFAULT_SPEC) -> CheckResult:
    res = CheckResult("substitution", "real")
    if abs(h(0.0)) > 1e-12:
        raise ValueError("substitution needs h(0) = 0")
    lhs, rhs = substitution_sides(f, h, x, spec)
    res.cases_run = 1
    if abs(lhs - rhs) > tol:
        res.failures.append({"inputs": {"f": f.to_json(), "h": h.to_json(), "x": x}, "lhs": lhs, "rhs": rhs})
    return res


def random_substitution(rng: random.Random) -> AnalyticFamily:
    raw = random_basis(rng, max_mono=3, max_terms=3)
    return raw.affine(-raw(0.0), 1.0)


def check_substitution(cases: int = 100, seed: int = 0, tol: float = 1e-6,
                       spec: QuadratureSpec = DEFAULT_SPEC) -> CheckResult:
    adder = make_real_adder("real")

    def case(rng):
        f = random_basis(rng)
        h = random_substitution(rng)
        x = rng.uniform(-2, 2)
        lhs, rhs = substitution_sides(f, h, x, spec)
        if abs(lhs - rhs) > tol:
            return failure_record(adder, {"f": f, "h": h, "x": x}, lhs, rhs)
        return None
    return drive_cases("substitution", adder, cases, seed, case)


def check_continuity(cases: int = 50, seed: int = 0, grid: int = 21, slack: float = 1e-4,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> CheckResult:
    """Finite-difference modulus of u -> integral_0^{x(u)} (f0 + u f1) on a
    grid in [0, 1], bounded by sup|f_u| |x'| + |x(u)| sup|f1| plus slack."""
    adder = make_real_adder("real")

    def case(rng):
        f0, f1 = random_basis(rng), random_basis(rng)
        x0, x1 = rng.uniform(-2, 2), rng.uniform(-1, 1)
        us = np.linspace(0.0, 1.0, grid)
        xs = x0 + x1 * us
        r = float(np.max(np.abs(xs)))
        pts = np.linspace(-r, r, 513)
        h = 2 * r / 512
        sup0 = float(np.max(np.abs(f0.values(pts)))) + f0.lipschitz(-r, r) * h
        sup1 = float(np.max(np.abs(f1.values(pts)))) + f1.lipschitz(-r, r) * h
        vals = np.array([integrate(AnalyticFamily(list(f0.terms) + [(k, p, u * c) for k, p, c in f1.terms]),
                                   0.0, x, spec) for u, x in zip(us, xs)])
        ratios = np.abs(np.diff(vals)) / np.diff(us)
        bound = (sup0 + sup1) * abs(x1) + r * sup1
        worst = float(ratios.max())
        if worst > bound * (1 + slack) + slack:
            return failure_record(adder, {"f0": f0, "f1": f1, "x0": x0, "x1": x1}, worst, bound)
        return None
    return drive_cases("continuity", adder, cases, seed, case)


# the complex polynomial adder

class ComplexPoly:
    """Polynomial with complex coefficients, lowest degree first."""

    MAX_DEGREE = 8
    COMPOSITE_CAP = 64

    def __init__(self, coeffs, composite: bool = False):
        c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        cap = self.COMPOSITE_CAP if composite else self.MAX_DEGREE
        if c.size - 1 > cap:
            raise ValueError(f"degree {c.size - 1} exceeds {cap}")
        self.coeffs = c

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def values(self, t):
        return self(t)

    def antiderivative(self) -> "ComplexPoly":
        """P with P' = p and P(0) = 0."""
        return ComplexPoly(np.polynomial.polynomial.polyint(self.coeffs), composite=True)

    def __mul__(self, other: "ComplexPoly") -> "ComplexPoly":
        return ComplexPoly(np.polynomial.polynomial.polymul(self.coeffs, other.coeffs), composite=True)

    def compose(self, inner: "ComplexPoly") -> "ComplexPoly":
        """self(inner(z)) by Horner's rule."""
        out = np.zeros(1, dtype=complex)
        for c in self.coeffs[::-1]:
            out = np.polynomial.polynomial.polymul(out, inner.coeffs)
            out[0] += c
        return ComplexPoly(out, composite=True)

    def to_json(self):
        return {"complex_poly": [[c.real, c.imag] for c in self.coeffs]}

    def __repr__(self):
        return f"ComplexPoly({self.coeffs.tolist()})"


def complex_path_sum(z: complex, p: ComplexPoly) -> complex:
    """P(z) - P(0) with P the termwise antiderivative."""
    return complex(p.antiderivative()(complex(z)))


def path_integral(p: ComplexPoly, vertices, spec: QuadratureSpec = DEFAULT_SPEC) -> complex:
    """Integral of p along the polyline through ``vertices`` by quadrature."""
    total = 0j
    for a, b in zip(vertices[:-1], vertices[1:]):
        a, b = complex(a), complex(b)
        total += complex(integrate_segments(lambda s, a=a, b=b: p(a + s * (b - a)) * (b - a), [0.0], [1.0], spec)[0])
    return total


def bent_vertex(z: complex) -> complex:
    """A corner off the segment [0, z]; the point 1j is used for z = 0."""
    z = complex(z)
    return z * (1 + 1j) / 2 if z != 0 else 1j


def check_path_independence(cases: int = 100, seed: int = 0, tol: float = 1e-8,
                            spec: QuadratureSpec = QuadratureSpec(abs_tol=1e-11)) -> CheckResult:
    """Straight and two-segment paths agree with each other and with P(z) - P(0)."""
    adder = make_complex_adder()

    def case(rng):
        z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        p = random_complex_poly(rng, ComplexPoly.MAX_DEGREE)
        straight = path_integral(p, [0, z], spec)
        bent = path_integral(p, [0, bent_vertex(z), z], spec)
        closed = complex_path_sum(z, p)
        if not _num_close(straight, bent, tol) or not _num_close(straight, closed, tol):
            return failure_record(adder, {"z": z, "p": p, "closed_form": closed}, straight, bent)
        return None
    return drive_cases("path_independence", adder, cases, seed, case)


def random_complex_poly(rng: random.Random, max_degree: int = 3) -> ComplexPoly:
    d = rng.randint(0, max_degree)
    return ComplexPoly([complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(d + 1)])


def _disk_fiber(z: complex) -> FiberDescriptor:
    z = complex(z)
    r = max(1.0, abs(z))
    grid = tuple(z * k / 8 for k in range(9)) + tuple(r * complex(math.cos(a), math.sin(a)) * 0.7
                                                     for a in np.linspace(0, 2 * math.pi, 6, endpoint=False))

    def sampler(rng):
        if rng.random() < 0.5:
            return z * rng.random()
        return complex(rng.uniform(-r, r), rng.uniform(-r, r))
    return FiberDescriptor("affine-line", sampler=sampler, grid=grid)


class ComplexBi:
    """F(s, t) = sum C[p, q] s^p t^q."""

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=complex)

    def __call__(self, pair):
        j, i = pair
        return complex(np.polynomial.polynomial.polyval2d(j, i, self.coeffs))

    def to_json(self):
        return {"complex_bivariate": [[[c.real, c.imag] for c in row] for row in self.coeffs]}


def make_complex_adder(tol: float = 1e-8) -> AdderInstance:
    def cfam(p: ComplexPoly, z) -> Family:
        return Family(_disk_fiber(z), p, "complex-poly", p)

    def boxtimes_op(z, f, g):
        try:
            return cfam(f.data * g.data.compose(f.data.antiderivative()), z)
        except ValueError as exc:
            raise Skip(str(exc)) from exc

    def pullback_op(z, f, g, i):
        return cfam(ComplexPoly([g.data(complex_path_sum(i, f.data))]), f(i))

    def bifamily(x, y, rng):
        C = np.array([[complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(3)] for _ in range(3)])
        return Family(FiberDescriptor("product", components=(_disk_fiber(y), _disk_fiber(x))),
                      ComplexBi(C), "complex-bivariate", ComplexBi(C))

    def partial_sum(x, y, F, over):
        C = F.data.coeffs
        P = np.polynomial.polynomial
        if over == "x":   # integrate in t up to x: a polynomial in s
            Ct = P.polyint(C, axis=1)
            return cfam(ComplexPoly([P.polyval(complex(x), row) for row in Ct], composite=True), y)
        Cs = P.polyint(C, axis=0)
        return cfam(ComplexPoly([P.polyval(complex(y), col) for col in Cs.T], composite=True), x)

    def family_equality(h, f, rng):
        for p in f.domain.check_points(rng):
            a, b = complex(h(p)), complex(f(p))
            if not _num_close(a, b, tol):
                return p, a, b
        return None

    def elem_gen(rng):
        if rng.random() < 0.1:
            return rng.choice((0j, 1 + 0j, 1j))
        return complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))

    return AdderInstance(
        name="cpoly",
        elem_kind="complex numbers",
        unit_elem=1 + 0j,
        zero_elem=0j,
        has_zero=True,
        fiber_of=_disk_fiber,
        sum_op=lambda z, f: complex_path_sum(z, f.data),
        flatten_op=lambda z, f, pair: complex_path_sum(pair.outer, f.data),
        equality=EqualityNotion.epsilon(tol),
        elem_gen=elem_gen,
        family_gen=lambda z, rng: cfam(random_complex_poly(rng, 2), z),
        commutative_flag=True,
        const_family_op=lambda z, v: cfam(ComplexPoly([complex(v)]), z),
        boxtimes_op=boxtimes_op,
        pullback_op=pullback_op,
        bifamily_gen=bifamily,
        partial_sum_op=partial_sum,
        family_equality=family_equality,
        point_equality=lambda p, q: _num_close(complex(p), complex(q), tol),
        scale_family_op=lambda y, f: cfam(ComplexPoly(f.data.coeffs * complex(y), composite=True), 0),
        serializer=serialize_analytic,
        description="polynomial families integrated along paths from 0",
    )


# the Euclidean right module and the [0, n] left module

class VecFamily:
    """Vector-valued family given by one real function per component."""

    def __init__(self, comps):
        self.comps = tuple(comps)

    @property
    def dim(self) -> int:
        return len(self.comps)

    def values(self, t):
        return np.stack([c.values(t) for c in self.comps])

    def __call__(self, t):
        return np.array([c(t) for c in self.comps])

    def to_json(self):
        return {"vector": [c.to_json() for c in self.comps]}


class VecBox(VecFamily):
    """t -> f(t) g(integral_0^t f) for a real f and vector g."""

    def __init__(self, f: Fn, g: VecFamily, spec: QuadratureSpec = DEFAULT_SPEC):
        self.f, self.g, self.spec = f, g, spec
        super().__init__(tuple(BoxFamily(f, c, spec) for c in g.comps))

    def to_json(self):
        return {"op": "boxtimes", "f": self.f.to_json(), "g": self.g.to_json()}


class _Row(Fn):
    def __init__(self, vec: "VecMapped", k: int):
        self.vec, self.k = vec, k

    def values(self, t):
        return self.vec.values(t)[self.k]


class VecMapped(VecFamily):
    """t -> phi(F(t)); phi acts on column vectors."""

    def __init__(self, F: VecFamily, phi, out_dim: int):
        self.F, self.phi = F, phi
        self.comps = tuple(_Row(self, k) for k in range(out_dim))

    def values(self, t):
        cols = self.F.values(t)
        mat = getattr(self.phi, "matrix", None)
        if mat is not None:
            return mat @ cols
        return np.stack([np.asarray(self.phi(cols[:, i]), float) for i in range(cols.shape[1])], axis=1)

    def to_json(self):
        return {"op": "map", "F": self.F.to_json()}


class MatrixMap:
    """v -> T v, a linear map between Euclidean spaces."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)

    def __call__(self, v):
        return self.matrix @ np.asarray(v, float)


def vector_module_sum(x: float, F: VecFamily, spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    """Componentwise integral from 0 to x (negative x gives the negated integral over [x, 0])."""
    return np.array([integrate(c, 0.0, float(x), spec) for c in F.comps]) + 0.0


def make_vector_module(dim: int = 2, base: AdderInstance | None = None, tol: float = DEFAULT_TOL,
                       spec: QuadratureSpec = DEFAULT_SPEC) -> RightModuleInstance:
    if not 1 <= dim <= 4:
        raise ValueError("dimension must be between 1 and 4")
    base = base if base is not None else make_real_adder("real", spec=spec)
    carrier = CARRIERS["real"]

    def vfam(F, x, domain=None):
        return Family(domain if domain is not None else interval_fiber(x), F, "vector", F)

    def mfamily_gen(x, rng):
        return vfam(VecFamily([random_carrier_family(carrier, x, rng) for _ in range(dim)]), x)

    def out_dim(phi):
        mat = getattr(phi, "matrix", None)
        return mat.shape[0] if mat is not None else dim

    return RightModuleInstance(
        name=f"real-vector{dim}",
        base=base,
        elem_kind=f"vectors in R^{dim}",
        msum_op=lambda x, F: vector_module_sum(x, F.data, spec),
        equality=EqualityNotion.epsilon(tol),
        melem_gen=lambda rng: np.array([rng.uniform(-3, 3) for _ in range(dim)]),
        mfamily_gen=mfamily_gen,
        const_mfamily_op=lambda x, m: vfam(VecFamily([AnalyticFamily.const(v) for v in m]), x),
        mboxtimes_op=lambda x, f, g: vfam(VecBox(_fn_of(f), g.data, spec), x),
        map_family_op=lambda F, phi: vfam(VecMapped(F.data, phi, out_dim(phi)), None, F.domain),
        serializer=serialize_analytic,
        description="Euclidean space with componentwise integrals",
    )


def interval_left_module_sum(m: float, f, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Integral of a [0, 1]-valued family over [0, m]."""
    return integrate(_fn_of(f), 0.0, float(m), spec)


def make_interval_module(n: float = 2.0, tol: float = DEFAULT_TOL,
                         spec: QuadratureSpec = DEFAULT_SPEC) -> LeftModuleInstance:
    """[0, n] as a left module over the [0, 1] adder."""
    base = make_real_adder("unit", tol=tol, spec=spec)
    carrier = Carrier("interval", 0.0, 1.0, 0.0, float(n), 0.02, 0.98)

    def family_gen(m, rng):
        lo, hi = 0.0, float(n)
        for _ in range(20):
            tlo = rng.uniform(carrier.target_lo, carrier.target_hi)
            thi = rng.uniform(tlo, carrier.target_hi)
            raw = random_basis(rng)
            vals = raw.values(np.linspace(lo, hi, 257))
            vmin, vmax = float(vals.min()), float(vals.max())
            beta = (thi - tlo) / (vmax - vmin) if vmax - vmin > 1e-12 else 0.0
            f = raw.affine(tlo - beta * vmin, beta)
            if certify_range(f, lo, hi, 0.0, 1.0):
                return _analytic_family(f, interval_fiber(m))
        raise Skip("no family passed the range certificate")

    def elem_gen(rng):
        r = rng.random()
        if r < 0.05:
            return 0.0
        if r < 0.1:
            return float(n)
        return rng.uniform(0.0, float(n))

    return LeftModuleInstance(
        name="interval_n",
        base=base,
        melem_gen=elem_gen,
        mfiber_of=interval_fiber,
        lsum_op=lambda m, f: interval_left_module_sum(m, f, spec),
        lflatten_op=lambda m, f, pair: real_flatten(m, _fn_of(f), pair, spec),
        equality=EqualityNotion.epsilon(tol),
        family_gen=family_gen,
        const_family_op=lambda m, v: _analytic_family(AnalyticFamily.const(float(v)), interval_fiber(m)),
        boxtimes_op=lambda m, f, g: _analytic_family(BoxFamily(_fn_of(f), _fn_of(g), spec), f.domain),
        pullback_op=lambda m, f, g, i: _analytic_family(
            AnalyticFamily.const(_fn_of(g)(real_flatten(m, _fn_of(f), (i, None), spec))), interval_fiber(f(i))),
        family_equality=vector_family_equality(tol),
        serializer=serialize_analytic,
        description=f"[0, {n}] with integrals of [0, 1]-valued families",
    )


def check_interval_closure(mod: LeftModuleInstance, n: float = 2.0, cases: int = 200, seed: int = 0) -> CheckResult:
    def case(rng):
        m = mod.melem_gen(rng)
        f = mod.family_gen(m, rng)
        s = mod.lsum_op(m, f)
        if not -1e-9 <= s <= n + 1e-9:
            return failure_record(mod, {"m": m, "f": f}, s, [0.0, n])
        return None
    return drive_cases("closure", mod, cases, seed, case)


__all__ = [
    "QuadratureSpec",
    "QuadratureError",
    "DEFAULT_SPEC",
    "integrate",
    "integrate_segments",
    "cumint",
    "Fn",
    "AnalyticFamily",
    "BoxFamily",
    "ScaledFamily",
    "SubstFamily",
    "BiFamily",
    "CARRIERS",
    "certify_range",
    "random_basis",
    "random_carrier_family",
    "real_sum",
    "real_flatten",
    "make_real_adder",
    "check_closure",
    "check_basis_oracle",
    "substitution_sides",
    "substitution_check",
    "check_substitution",
    "check_continuity",
    "ComplexPoly",
    "complex_path_sum",
    "path_integral",
    "bent_vertex",
    "check_path_independence",
    "make_complex_adder",
    "VecFamily",
    "MatrixMap",
    "vector_module_sum",
    "make_vector_module",
    "interval_left_module_sum",
    "make_interval_module",
    "check_interval_closure",
]
