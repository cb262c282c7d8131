"""Truncated q-adic integers and the Z_q adder.

Families are polynomials with rational coefficients that map Z_q into
itself.  Sums go through the Faulhaber transform; the independent limit
oracle sums integer partial sums Sum_{i <= x mod q^n} f(i) directly.
"""
from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .arith import PolyError, RationalPoly, poly_compose, poly_substitute, sum_operator
from .core import (
    AdderInstance,
    CheckResult,
    EqualityNotion,
    Family,
    FiberDescriptor,
    FlatPair,
    Skip,
    drive_cases,
    failure_record,
)

PRIMES = (2, 3, 5, 7)
DEFAULT_PREC = 16
MIN_TRUSTED = 4


class PrecisionError(ArithmeticError):
    """Fewer than MIN_TRUSTED digits survive; raise the working precision."""


def valuation(n: int, q: int) -> int:
    if n == 0:
        return math.inf
    v = 0
    while n % q == 0:
        n //= q
        v += 1
    return v


class PadicInt:
    """An element of Z_q known modulo q^(prec - loss).

    ``value`` is the canonical representative in [0, q^prec); the low
    ``prec - loss`` digits are trusted.
    """

    __slots__ = ("q", "value", "prec", "loss")

    def __init__(self, q: int, value: int, prec: int = DEFAULT_PREC, loss: int = 0):
        if q not in PRIMES:
            raise ValueError(f"q must be one of {PRIMES}, got {q}")
        if prec < 1:
            raise ValueError("precision must be positive")
        self.q = q
        self.prec = prec
        self.loss = min(max(0, loss), prec)
        self.value = int(value) % q ** prec

    @property
    def trusted(self) -> int:
        return self.prec - self.loss

    @property
    def digits(self) -> list:
        """Base-q digits, least significant first, length ``prec``."""
        out, v = [], self.value
        for _ in range(self.prec):
            v, d = divmod(v, self.q)
            out.append(d)
        return out

    def _peer(self, other) -> "PadicInt":
        if isinstance(other, PadicInt):
            if other.q != self.q:
                raise ValueError(f"mixing Z_{self.q} and Z_{other.q}")
            return other
        if isinstance(other, int):
            return PadicInt(self.q, other, self.prec)
        if isinstance(other, Fraction):
            return padic_from_fraction(other, self.q, self.prec)
        return NotImplemented

    def _combine(self, other, value) -> "PadicInt":
        prec = min(self.prec, other.prec)
        trusted = min(self.trusted, other.trusted, prec)
        return PadicInt(self.q, value, prec, prec - trusted)

    def __add__(self, other):
        o = self._peer(other)
        if o is NotImplemented:
            return o
        return self._combine(o, self.value + o.value)

    __radd__ = __add__

    def __neg__(self):
        return PadicInt(self.q, -self.value, self.prec, self.loss)

    def __sub__(self, other):
        o = self._peer(other)
        if o is NotImplemented:
            return o
        return self._combine(o, self.value - o.value)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._peer(other)
        if o is NotImplemented:
            return o
        # multiplying by a unit keeps the precision; by q^v it shifts it up
        return self._combine(o, self.value * o.value)

    __rmul__ = __mul__

    def agreement(self, other) -> int:
        """Number of low digits on which the two values agree (capped at the
        common trusted length)."""
        o = self._peer(other)
        cap = min(self.trusted, o.trusted)
        diff = (self.value - o.value) % self.q ** cap
        return cap if diff == 0 else min(valuation(diff, self.q), cap)

    def agrees(self, other, digits: int) -> bool:
        o = self._peer(other)
        if min(self.trusted, o.trusted) < digits:
            return False
        return (self.value - o.value) % self.q ** digits == 0

    def __eq__(self, other):
        o = self._peer(other)
        if o is NotImplemented:
            return NotImplemented
        cap = min(self.trusted, o.trusted)
        return (self.value - o.value) % self.q ** cap == 0

    __hash__ = None

    def to_string(self) -> str:
        return "..." + "".join(str(d) for d in reversed(self.digits)) + f" (base {self.q})"

    __str__ = to_string

    def __repr__(self):
        extra = f", loss={self.loss}" if self.loss else ""
        return f"PadicInt({self.q}, {self.value}, prec={self.prec}{extra})"

    def to_json(self):
        return {"q": self.q, "digits": self.to_string(), "loss": self.loss}


_PADIC_RE = re.compile(r"^\s*(?:\.\.\.)?\s*([0-9]+)\s*\(\s*base\s+([0-9]+)\s*\)\s*$")


def parse_padic(text: str) -> PadicInt:
    """Parse ``...d_{N-1}...d_1d_0 (base q)``; N is the number of digits."""
    m = _PADIC_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse q-adic integer {text!r}; expected '...<digits> (base q)'")
    digits, q = m.group(1), int(m.group(2))
    if q not in PRIMES:
        raise ValueError(f"base must be one of {PRIMES}, got {q}")
    for pos, ch in enumerate(digits):
        if int(ch) >= q:
            raise ValueError(f"digit {ch!r} at position {pos} is not below {q}")
    value = 0
    for ch in digits:
        value = value * q + int(ch)
    return PadicInt(q, value, len(digits))


def padic_from_fraction(c: Fraction, q: int, prec: int = DEFAULT_PREC) -> PadicInt:
    c = Fraction(c)
    if c.denominator % q == 0:
        raise ValueError(f"{c} is not a {q}-adic integer")
    mod = q ** prec
    return PadicInt(q, c.numerator * pow(c.denominator, -1, mod), prec)


# families

@dataclass(frozen=True, eq=False)
class PadicPolyFamily:
    """i -> poly(i) for a univariate rational polynomial mapping Z_q into
    itself; ``loss`` records digits already untrusted in the coefficients."""
    poly: RationalPoly
    q: int
    prec: int = DEFAULT_PREC
    loss: int = 0
    _dens: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if self.poly.nvars != 1:
            raise PolyError("q-adic families are univariate")
        object.__setattr__(self, "_dens", _denominator_info(self.poly, self.q))

    @classmethod
    def from_coeffs(cls, coeffs, q: int, prec: int = DEFAULT_PREC) -> "PadicPolyFamily":
        vals = [c.value if isinstance(c, PadicInt) else c for c in coeffs]
        return cls(RationalPoly.from_coeffs(vals), q, prec)

    @property
    def degree(self) -> int:
        return self.poly.degree()

    @property
    def denominator_valuation(self) -> int:
        return self._dens[1]

    def __call__(self, i) -> PadicInt:
        return padic_eval_poly(self.poly, i, self.q, self.prec, self.loss, self._dens)

    def to_json(self):
        return {"q": self.q, "poly": self.poly.format(("X",)), "loss": self.loss}


def padic_eval_poly(poly: RationalPoly, x, q: int, prec: int, extra_loss: int = 0, dens=None) -> PadicInt:
    """Evaluate at the integer representative of x.  If x is known mod q^t
    and the coefficients have denominators of valuation v, the value is
    known mod q^(t - v)."""
    if isinstance(x, PadicInt):
        if x.q != q:
            raise ValueError(f"mixing Z_{q} and Z_{x.q}")
        rep, x_loss, prec = x.value, x.loss + (prec - min(prec, x.prec)), min(prec, x.prec)
    else:
        rep, x_loss = int(x), 0
    if dens is None:
        dens = _denominator_info(poly, q)
    r = poly(rep)
    mod = q ** prec
    if r.denominator % q == 0:
        raise ArithmeticError(f"polynomial value {r} at {rep} is not {q}-integral")
    val = r.numerator * pow(r.denominator, -1, mod) if r.denominator != 1 else r.numerator
    if isinstance(x, PadicInt):
        loss = max(x_loss + dens[1], extra_loss)
    else:
        loss = extra_loss
    return PadicInt(q, val, prec, loss)


def _denominator_info(poly: RationalPoly, q: int) -> tuple:
    den = 1
    for c in poly.terms.values():
        den = math.lcm(den, c.denominator)
    return den, (valuation(den, q) if den > 1 else 0)


def _check_trusted(p: PadicInt) -> PadicInt:
    if p.trusted < MIN_TRUSTED:
        raise PrecisionError(f"only {p.trusted} trusted digits remain (need {MIN_TRUSTED}); raise the precision")
    return p


def padic_sum(x: PadicInt, f: PadicPolyFamily) -> PadicInt:
    """Sum_{i=1}^{x} f(i) via the Faulhaber transform of f."""
    S = sum_operator(f.poly)
    return _check_trusted(padic_eval_poly(S, x, f.q, f.prec, f.loss))


def padic_flatten(x: PadicInt, f: PadicPolyFamily, i: PadicInt, j: PadicInt) -> PadicInt:
    """j + Sum_{k=1}^{i-1} f(k)."""
    return _check_trusted(j + padic_sum(i - 1, f))


def padic_boxtimes(f: PadicPolyFamily, g: PadicPolyFamily) -> PadicPolyFamily:
    """i -> Sum_{j=1}^{f(i)} g(j + Sum_{k<i} f(k)), as a polynomial in i."""
    Y = RationalPoly.var(1, 2)
    P = sum_operator(f.poly)
    shift = poly_compose(P, RationalPoly.var(0) - 1).lift(2)
    inner = poly_substitute(g.poly.lift(2), {0: Y + shift})
    summed = sum_operator(inner, var=1)
    out = poly_substitute(summed, {1: f.poly.lift(2)})
    uni = RationalPoly(1, {(e[0],): c for e, c in out.terms.items()})
    return PadicPolyFamily(uni, f.q, min(f.prec, g.prec), max(f.loss, g.loss))


def padic_shift(g: PadicPolyFamily, c: PadicInt) -> PadicPolyFamily:
    """j -> g(j + c), with c folded into the coefficients through its
    integer representative."""
    poly = poly_compose(g.poly, RationalPoly.var(0) + c.value)
    return PadicPolyFamily(poly, g.q, min(g.prec, c.prec), max(g.loss, c.loss))


# limit oracle, independent of Faulhaber polynomials

def _power_sums_shift(shift: int, block: list) -> list:
    """Power sums over (shift, shift + L] from those over (0, L]:
    sum_t C(j,t) shift^(j-t) p_t(L)."""
    return [sum(comb(j, t) * shift ** (j - t) * block[t] for t in range(j + 1)) for j in range(len(block))]


def integer_power_sums(n: int, degree: int, q: int | None = None) -> list:
    """[sum_{i=1}^n i^j for j = 0..degree], exactly.

    With q given, n is decomposed into base-q digits and whole blocks of
    length q^m are assembled by binomial shifting, so large n is cheap."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if q is None or n < 64:
        return [sum(i ** j for i in range(1, n + 1)) for j in range(degree + 1)]
    digits = []
    v = n
    while v:
        v, d = divmod(v, q)
        digits.append(d)
    # blocks[m] = power sums over (0, q^m]
    blocks = [[1] * (degree + 1)]
    for m in range(1, len(digits)):
        L = q ** (m - 1)
        acc = [0] * (degree + 1)
        for r in range(q):
            sh = _power_sums_shift(r * L, blocks[m - 1])
            acc = [a + b for a, b in zip(acc, sh)]
        blocks.append(acc)
    # assemble n = sum d_m q^m, highest digit first
    total = [0] * (degree + 1)
    offset = 0
    for m in reversed(range(len(digits))):
        L = q ** m
        for _ in range(digits[m]):
            sh = _power_sums_shift(offset, blocks[m])
            total = [a + b for a, b in zip(total, sh)]
            offset += L
    assert offset == n
    return total


def padic_sum_limit_oracle(x: PadicInt, f: PadicPolyFamily, n_max: int = 12) -> PadicInt:
    """Stabilized value of Sum_{i=1}^{x mod q^n} f(i) as n grows to n_max.

    The trusted digit count is the agreement between the last two stages,
    capped at n_max - 1."""
    q = x.q
    if n_max > x.trusted:
        n_max = x.trusted
    if n_max < 2:
        raise PrecisionError("need at least two stages")
    coeffs = f.poly.coeffs_in(0)
    deg = f.poly.degree()
    stages = []
    for n in (n_max - 1, n_max):
        xn = x.value % q ** n
        ps = integer_power_sums(xn, deg, q)
        s = sum(c.constant_value() * ps[k] for k, c in coeffs.items())
        if s.denominator % q == 0:
            raise ArithmeticError("partial sum is not q-integral")
        stages.append(s)
    prec = x.prec
    mod = q ** prec
    vals = [s.numerator * pow(s.denominator, -1, mod) % mod for s in stages]
    diff = (vals[1] - vals[0]) % mod
    agree = prec if diff == 0 else valuation(diff, q)
    trusted = min(agree, n_max - 1)
    if trusted < MIN_TRUSTED:
        raise PrecisionError(f"partial sums did not stabilize: {trusted} digits after {n_max} stages")
    return PadicInt(q, vals[1], prec, prec - trusted)


# the adder

def padic_fiber(q: int, prec: int) -> FiberDescriptor:
    return FiberDescriptor("padic-line", sampler=lambda rng: random_padic(rng, q, prec))


def random_padic(rng: random.Random, q: int, prec: int = DEFAULT_PREC) -> PadicInt:
    kind = rng.random()
    if kind < 0.2:
        return PadicInt(q, rng.randint(0, 12), prec)
    if kind < 0.3:
        return PadicInt(q, -rng.randint(1, 5), prec)
    return PadicInt(q, rng.randrange(q ** prec), prec)


def random_padic_family(rng: random.Random, q: int, prec: int = DEFAULT_PREC, max_degree: int = 2) -> PadicPolyFamily:
    deg = rng.randint(0, max_degree)
    coeffs = []
    for _ in range(deg + 1):
        coeffs.append(rng.randrange(q ** prec) if rng.random() < 0.6 else rng.randint(-4, 4))
    return PadicPolyFamily.from_coeffs(coeffs, q, prec)


def _as_family(pf: PadicPolyFamily, prec: int) -> Family:
    return Family(padic_fiber(pf.q, prec), pf, "polynomial", pf)


def _padic_equal(digits: int):
    def check(a, b):
        if not isinstance(a, PadicInt) or not isinstance(b, PadicInt):
            return None
        return True if a.agrees(b, digits) else None
    return check


def make_padic_adder(q: int, prec: int = 24, check_digits: int = 8, name: str | None = None) -> AdderInstance:
    """Z_q with sums of polynomial families.  Elements compare equal when
    they agree on at least ``check_digits`` trusted digits."""
    fiber = padic_fiber(q, prec)

    def sum_op(x, f: Family):
        return padic_sum(x, f.data)

    def flatten_op(x, f: Family, p: FlatPair):
        return padic_flatten(x, f.data, p.outer, p.inner)

    def boxtimes_op(x, f, g):
        try:
            return _as_family(padic_boxtimes(f.data, g.data), prec)
        except PolyError as exc:
            raise Skip(str(exc)) from exc

    def pullback_op(x, f, g, i):
        return _as_family(padic_shift(g.data, padic_sum(i - 1, f.data)), prec)

    def bifamily(x, y, rng):
        # F(j, i) in variables X = j (over y) and Y = i (over x)
        terms = {}
        for _ in range(rng.randint(1, 4)):
            e = (rng.randint(0, 2), rng.randint(0, 2))
            terms[e] = rng.randrange(q ** prec) if rng.random() < 0.5 else rng.randint(-3, 3)
        poly = RationalPoly(2, terms)
        dom = FiberDescriptor("product", components=(fiber, fiber))
        return Family(dom, lambda p: _eval2(poly, p, q, prec), "polynomial", poly)

    def partial_sum(x, y, F: Family, over: str):
        poly = F.data
        if over == "x":
            s = sum_operator(poly, var=1)
            uni, loss = _bind(s, 1, x, q)
        else:
            s = sum_operator(poly, var=0)
            uni, loss = _bind(s, 0, y, q)
        return _as_family(PadicPolyFamily(uni, q, prec, loss), prec)

    def const_family(x, v):
        if isinstance(v, PadicInt):
            return _as_family(PadicPolyFamily(RationalPoly.const(v.value), q, prec, v.loss), prec)
        return _as_family(PadicPolyFamily(RationalPoly.const(v), q, prec), prec)

    def scale_family(y: PadicInt, f: Family):
        pf = f.data
        return _as_family(PadicPolyFamily(pf.poly * y.value, q, prec, max(pf.loss, y.loss)), prec)

    return AdderInstance(
        name=name or f"zq{q}",
        elem_kind=f"{q}-adic integers mod {q}^{prec}",
        unit_elem=PadicInt(q, 1, prec),
        zero_elem=PadicInt(q, 0, prec),
        has_zero=True,
        fiber_of=lambda x: fiber,
        sum_op=sum_op,
        flatten_op=flatten_op,
        equality=EqualityNotion.exact(checker=_padic_equal(check_digits)),
        elem_gen=lambda rng: random_padic(rng, q, prec),
        family_gen=lambda x, rng: _as_family(random_padic_family(rng, q, prec), prec),
        commutative_flag=True,
        const_family_op=const_family,
        boxtimes_op=boxtimes_op,
        pullback_op=pullback_op,
        bifamily_gen=bifamily,
        partial_sum_op=partial_sum,
        scale_family_op=scale_family,
        description=f"{q}-adic integers; sums of polynomial families through Faulhaber polynomials",
    )


def _eval2(poly: RationalPoly, p, q, prec) -> PadicInt:
    j, i = p
    uni, loss = _bind(poly, 1, i, q)
    return padic_eval_poly(uni, j, q, prec, loss)


def _bind(poly: RationalPoly, var: int, value: PadicInt, q: int):
    """Substitute the integer representative of ``value`` for ``var`` in a
    bivariate polynomial; return the remaining univariate polynomial and the
    digits lost."""
    sub = poly_substitute(poly, {var: value.value})
    keep = 1 - var
    uni = RationalPoly(1, {(e[keep],): c for e, c in sub.terms.items()})
    return uni, value.loss + _denominator_info(poly, q)[1]


def check_limit_oracle(q: int, cases: int = 100, seed: int = 0, prec: int = DEFAULT_PREC,
                       digits: int = 8) -> CheckResult:
    """padic_sum against the stabilized partial sums, modulo q^digits."""
    adder = make_padic_adder(q, prec=prec, check_digits=digits)

    def case(rng):
        x = random_padic(rng, q, prec)
        f = random_padic_family(rng, q, prec)
        fast = padic_sum(x, f)
        slow = padic_sum_limit_oracle(x, f, n_max=prec)
        if not fast.agrees(slow, digits):
            return failure_record(adder, {"x": x, "f": f}, fast, slow)
        return None
    return drive_cases("limit_oracle", adder, cases, seed, case)


__all__ = [
    "PRIMES",
    "DEFAULT_PREC",
    "PrecisionError",
    "valuation",
    "PadicInt",
    "parse_padic",
    "padic_from_fraction",
    "PadicPolyFamily",
    "padic_eval_poly",
    "padic_sum",
    "padic_flatten",
    "padic_boxtimes",
    "padic_shift",
    "integer_power_sums",
    "padic_sum_limit_oracle",
    "padic_fiber",
    "random_padic",
    "random_padic_family",
    "make_padic_adder",
    "check_limit_oracle",
]
