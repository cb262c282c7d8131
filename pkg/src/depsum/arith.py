"""Exact rational polynomials, Bernoulli numbers and Faulhaber polynomials.

Rationals are :class:`fractions.Fraction`.  Polynomials live in a fixed
number of variables (at most four: X, Y, Z for indices and U for a
parameter) and are stored as a mapping from exponent vectors to nonzero
coefficients.
"""
from __future__ import annotations

import threading
from fractions import Fraction
from math import comb, lcm
from typing import Iterable, Mapping, Sequence, Union

__all__ = [
    "RationalPoly",
    "PolyError",
    "bernoulli",
    "faulhaber_poly",
    "sum_operator",
    "poly_eval",
    "poly_compose",
    "poly_substitute",
    "poly_identity_check_by_points",
    "VAR_NAMES",
    "MAX_VARS",
    "DEGREE_CAP",
]

MAX_VARS = 4
VAR_NAMES = ("X", "Y", "Z", "U")
# Composite families such as f (x) g reach degree (d_f+1)(d_g+1)-1, which is
# 35 for two quintics; summing adds one more.
DEGREE_CAP = 48

Scalar = Union[int, Fraction]


class PolyError(ValueError):
    pass


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise PolyError(f"not an exact rational: {c!r}")


class RationalPoly:
    """Polynomial over Q in ``nvars`` variables."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[tuple, Scalar] | None = None):
        if not 1 <= nvars <= MAX_VARS:
            raise PolyError(f"variable count must be 1..{MAX_VARS}, got {nvars}")
        self.nvars = nvars
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != nvars or any(e < 0 for e in exps):
                raise PolyError(f"bad exponent vector {exps} for {nvars} variables")
            c = _frac(c)
            if c:
                clean[exps] = clean.get(exps, Fraction(0)) + c
                if not clean[exps]:
                    del clean[exps]
        if clean and max(sum(e) for e in clean) > DEGREE_CAP:
            raise PolyError(f"degree cap {DEGREE_CAP} exceeded")
        self.terms = clean
        self._hash = None

    # construction helpers
    @classmethod
    def const(cls, c: Scalar, nvars: int = 1) -> "RationalPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, index: int, nvars: int = 1) -> "RationalPoly":
        if not 0 <= index < nvars:
            raise PolyError(f"variable {index} out of range for {nvars} variables")
        e = [0] * nvars
        e[index] = 1
        return cls(nvars, {tuple(e): 1})

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[Scalar], var: int = 0, nvars: int = 1) -> "RationalPoly":
        """``coeffs[k]`` is the coefficient of ``var**k``."""
        terms = {}
        for k, c in enumerate(coeffs):
            e = [0] * nvars
            e[var] = k
            terms[tuple(e)] = c
        return cls(nvars, terms)

    def lift(self, nvars: int) -> "RationalPoly":
        """Embed into a ring with more variables (new ones appended)."""
        if nvars < self.nvars:
            raise PolyError("cannot lift to fewer variables")
        pad = (0,) * (nvars - self.nvars)
        return RationalPoly(nvars, {e + pad: c for e, c in self.terms.items()})

    def _coerce(self, other) -> "RationalPoly":
        if isinstance(other, RationalPoly):
            if other.nvars == self.nvars:
                return other
            if other.nvars < self.nvars:
                return other.lift(self.nvars)
            raise PolyError(f"arity mismatch: {self.nvars} vs {other.nvars} variables")
        return RationalPoly.const(_frac(other), self.nvars)

    # ring structure
    def __add__(self, other):
        other = self._coerce(other)
        if other.nvars > self.nvars:
            return self.lift(other.nvars) + other
        t = dict(self.terms)
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c
        return RationalPoly(self.nvars, t)

    __radd__ = __add__

    def __neg__(self):
        return RationalPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RationalPoly):
            c = _frac(other)
            return RationalPoly(self.nvars, {e: v * c for e, v in self.terms.items()})
        other = self._coerce(other)
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0) + c1 * c2
        return RationalPoly(self.nvars, t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = _frac(other)
        if not c:
            raise ZeroDivisionError("polynomial division by zero")
        return self * (1 / c)

    def __pow__(self, k: int):
        if k < 0:
            raise PolyError("negative power")
        result = RationalPoly.const(1, self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, RationalPoly):
            if other.nvars != self.nvars:
                n = max(self.nvars, other.nvars)
                return self.lift(n).terms == other.lift(n).terms
            return self.terms == other.terms
        try:
            return self.terms == RationalPoly.const(_frac(other), self.nvars).terms
        except PolyError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # inspection
    def degree(self, var: int | None = None) -> int:
        """Total degree, or degree in ``var``; the zero polynomial has degree -1."""
        if not self.terms:
            return -1
        if var is None:
            return max(sum(e) for e in self.terms)
        return max(e[var] for e in self.terms)

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise PolyError("polynomial is not constant")
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def variables(self) -> set[int]:
        return {i for e in self.terms for i, k in enumerate(e) if k}

    def coeffs_in(self, var: int) -> dict[int, "RationalPoly"]:
        """Split as sum_k c_k * var**k with c_k free of ``var``."""
        out: dict[int, dict] = {}
        for e, c in self.terms.items():
            k = e[var]
            rest = e[:var] + (0,) + e[var + 1:]
            out.setdefault(k, {})[rest] = c
        return {k: RationalPoly(self.nvars, t) for k, t in out.items()}

    # evaluation and substitution
    def __call__(self, *args):
        return poly_eval(self, args)

    def substitute(self, var: int, value) -> "RationalPoly":
        return poly_substitute(self, {var: value})

    def __repr__(self):
        return f"RationalPoly({self.nvars}, {self.terms!r})"

    def __str__(self):
        return self.format()

    def format(self, names: Sequence[str] = VAR_NAMES) -> str:
        """Render with a common denominator, e.g. ``(2*X^3 + 3*X^2 + X)/6``."""
        if not self.terms:
            return "0"
        den = 1
        for c in self.terms.values():
            den = lcm(den, c.denominator)
        items = sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)
        parts = []
        for exps, c in items:
            n = int(c * den)
            mono = "*".join(
                names[i] if k == 1 else f"{names[i]}^{k}" for i, k in enumerate(exps) if k
            )
            mag = abs(n)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if not parts:
                parts.append(("-" if n < 0 else "") + body)
            else:
                parts.append(("- " if n < 0 else "+ ") + body)
        text = " ".join(parts)
        if den == 1:
            return text
        return f"({text})/{den}"


def _as_poly_or_scalar(v, nvars: int):
    if isinstance(v, RationalPoly):
        return v if v.nvars >= nvars else v.lift(nvars)
    return _frac(v)


def poly_eval(p: RationalPoly, args: Sequence) -> Fraction | RationalPoly:
    """Evaluate at ``args`` (one per variable).  Arguments may themselves be
    polynomials, in which case the result is a polynomial."""
    args = tuple(args)
    if len(args) != p.nvars:
        raise PolyError(f"arity mismatch: polynomial has {p.nvars} variables, got {len(args)} arguments")
    if not any(isinstance(a, RationalPoly) for a in args):
        vals = [_frac(a) for a in args]
        total = Fraction(0)
        for e, c in p.terms.items():
            t = c
            for v, k in zip(vals, e):
                if k:
                    t *= v ** k
            total += t
        return total
    return poly_substitute(p, dict(enumerate(args)))


def poly_substitute(p: RationalPoly, mapping: Mapping[int, object]) -> RationalPoly:
    """Simultaneously replace variables by rationals or polynomials."""
    for var in mapping:
        if not 0 <= var < p.nvars:
            raise PolyError(f"arity mismatch: no variable {var} in a {p.nvars}-variable polynomial")
    nv = p.nvars
    for v in mapping.values():
        if isinstance(v, RationalPoly):
            if v.nvars > nv:
                raise PolyError(f"arity mismatch: substituting {v.nvars}-variable polynomial into {nv}")
    subs = {k: _as_poly_or_scalar(v, nv) for k, v in mapping.items()}
    power_cache: dict = {}

    def power(var, k):
        key = (var, k)
        if key not in power_cache:
            base = subs[var]
            power_cache[key] = base ** k
        return power_cache[key]

    # group terms by the exponents of the substituted variables
    groups: dict = {}
    for e, c in p.terms.items():
        key = tuple(e[i] for i in sorted(subs))
        keep = tuple(0 if i in subs else k for i, k in enumerate(e))
        g = groups.setdefault(key, {})
        g[keep] = g.get(keep, 0) + c
    order = sorted(subs)
    acc = RationalPoly(nv)
    for key, rest in groups.items():
        term = RationalPoly(nv, rest)
        scalar = Fraction(1)
        for var, k in zip(order, key):
            if k:
                v = power(var, k)
                if isinstance(v, RationalPoly):
                    term = term * v
                else:
                    scalar *= v
        acc = acc + (term * scalar if scalar != 1 else term)
    return acc


def poly_compose(p: RationalPoly, q) -> RationalPoly:
    """Univariate composition p(q)."""
    if p.nvars != 1:
        raise PolyError("poly_compose expects a univariate outer polynomial")
    if isinstance(q, RationalPoly) and q.nvars != 1:
        raise PolyError("arity mismatch: poly_compose expects a univariate inner polynomial")
    return poly_substitute(p, {0: q})


_bern_lock = threading.Lock()
_bern_minus: list[Fraction] = [Fraction(1)]


def bernoulli(n: int) -> Fraction:
    """B_n with the convention B_1 = +1/2."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n >= len(_bern_minus):
        with _bern_lock:
            # sum_{j<=m} C(m+1, j) B_j = 0 for m >= 1 (minus convention)
            while len(_bern_minus) <= n:
                m = len(_bern_minus)
                s = sum(comb(m + 1, j) * _bern_minus[j] for j in range(m))
                _bern_minus.append(-s / (m + 1))
    b = _bern_minus[n]
    return -b if n == 1 else b


_faul_lock = threading.Lock()
_faul_cache: dict[int, tuple] = {}


def _faulhaber_coeffs(d: int) -> tuple:
    c = _faul_cache.get(d)
    if c is None:
        coeffs = [Fraction(0)] * (d + 2)
        for n in range(d + 1):
            coeffs[d - n + 1] += Fraction(comb(d + 1, n)) * bernoulli(n) / (d + 1)
        c = tuple(coeffs)
        with _faul_lock:
            _faul_cache[d] = c
    return c


def faulhaber_poly(d: int) -> RationalPoly:
    """F_d with F_d(m) = 1^d + ... + m^d."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    return RationalPoly.from_coeffs(_faulhaber_coeffs(d))


def sum_operator(p: RationalPoly, var: int = 0) -> RationalPoly:
    """Replace ``var**k`` by F_k(var) in every term.

    For univariate p this is the polynomial with value sum_{i=1}^m p(i) at m.
    """
    acc: dict = {}
    for e, c in p.terms.items():
        k = e[var]
        for pw, fc in enumerate(_faulhaber_coeffs(k)):
            if fc:
                e2 = e[:var] + (pw,) + e[var + 1:]
                acc[e2] = acc.get(e2, 0) + c * fc
    return RationalPoly(p.nvars, acc)


def poly_identity_check_by_points(p: RationalPoly, q: RationalPoly, count: int) -> bool:
    """True iff p(n) == q(n) for n = 0..count-1 (univariate)."""
    if p.nvars != 1 or q.nvars != 1:
        raise PolyError("point identity check is for univariate polynomials")
    if count <= max(p.degree(), q.degree()):
        raise PolyError("count must exceed both degrees")
    return all(poly_eval(p, (n,)) == poly_eval(q, (n,)) for n in range(count))


def points_needed(polys: Iterable[RationalPoly]) -> int:
    return max((p.degree() for p in polys), default=0) + 1
