"""Ordinals below epsilon_0 in Cantor normal form and step-function families.

An ordinal is a tuple of ``(exponent, coefficient)`` terms with strictly
decreasing exponents.  Text syntax uses ``w`` for omega::

    >>> str(parse_ordinal("w^2*3 + w + 5"))
    'w^2*3 + w + 5'
    >>> str(W * 2 + W ** 2)
    'w^2'
"""
from __future__ import annotations

import random
import re
from functools import total_ordering
from typing import Iterable, Sequence

from .core import AdderInstance, EqualityNotion, Family, FiberDescriptor, default_serialize

__all__ = [
    "CnfOrdinal",
    "OrdinalError",
    "ZERO",
    "ONE",
    "W",
    "nat",
    "cnf_add",
    "cnf_mul",
    "cnf_left_sub",
    "cnf_cmp",
    "cnf_divmod",
    "parse_ordinal",
    "StepFamily",
    "ord_sum",
    "ord_partial_sum",
    "ord_flatten_eval",
    "ord_shift_restrict",
    "ord_boxtimes",
    "random_ordinal",
    "random_below",
    "random_step_family",
    "MAX_TOWER",
    "ord_fiber",
    "ord_fubini_counterexamples",
    "make_ord_adder",
    "ord_sum_recursion",
]

MAX_TOWER = 4


class OrdinalError(ValueError):
    pass


@total_ordering
class CnfOrdinal:
    __slots__ = ("terms", "_hash", "height")

    def __init__(self, terms: Iterable[tuple["CnfOrdinal", int]] = ()):
        terms = tuple(terms)
        prev = None
        height = 0
        for e, c in terms:
            if not isinstance(e, CnfOrdinal) or not isinstance(c, int) or c <= 0:
                raise OrdinalError(f"bad CNF term ({e!r}, {c!r})")
            if prev is not None and not e < prev:
                raise OrdinalError("CNF exponents must be strictly decreasing")
            prev = e
            if e.terms:
                height = max(height, e.height + 1)
        if height > MAX_TOWER:
            raise OrdinalError(f"exponent tower height {height} exceeds cap {MAX_TOWER}")
        self.terms = terms
        self.height = height
        self._hash = None

    # basic predicates
    def is_zero(self) -> bool:
        return not self.terms

    def is_finite(self) -> bool:
        return all(e.is_zero() for e, _ in self.terms)

    def is_successor(self) -> bool:
        return bool(self.terms) and self.terms[-1][0].is_zero()

    def is_limit(self) -> bool:
        return bool(self.terms) and not self.is_successor()

    def __int__(self):
        if not self.is_finite():
            raise OrdinalError(f"{self} is not finite")
        return self.terms[0][1] if self.terms else 0

    def leading_exponent(self) -> "CnfOrdinal":
        if not self.terms:
            raise OrdinalError("zero has no leading exponent")
        return self.terms[0][0]

    def __eq__(self, other):
        if isinstance(other, int):
            other = nat(other)
        if not isinstance(other, CnfOrdinal):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.terms)
        return self._hash

    def __lt__(self, other):
        if isinstance(other, int):
            other = nat(other)
        return cnf_cmp(self, other) < 0

    def __add__(self, other):
        return cnf_add(self, _coerce(other))

    def __radd__(self, other):
        return cnf_add(_coerce(other), self)

    def __mul__(self, other):
        return cnf_mul(self, _coerce(other))

    def __rmul__(self, other):
        return cnf_mul(_coerce(other), self)

    def __pow__(self, other):
        # only omega ** e is needed
        if self != W:
            raise OrdinalError("only powers of w are supported")
        return CnfOrdinal(((_coerce(other), 1),))

    def left_sub(self, other: "CnfOrdinal") -> "CnfOrdinal":
        """The unique d with self + d == other."""
        return cnf_left_sub(self, _coerce(other))

    def __repr__(self):
        return f"CnfOrdinal({str(self)!r})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            if e.is_zero():
                parts.append(str(c))
                continue
            if e == ONE:
                base = "w"
            elif e.is_finite():
                base = f"w^{int(e)}"
            elif e == W:
                base = "w^w"
            else:
                base = f"w^({e})"
            parts.append(base if c == 1 else f"{base}*{c}")
        return " + ".join(parts)


def _coerce(x) -> CnfOrdinal:
    if isinstance(x, CnfOrdinal):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return nat(x)
    raise OrdinalError(f"not an ordinal: {x!r}")


ZERO = CnfOrdinal(())
_nat_cache: dict[int, CnfOrdinal] = {0: ZERO}


def nat(n: int) -> CnfOrdinal:
    if n < 0:
        raise OrdinalError("ordinals are non-negative")
    o = _nat_cache.get(n)
    if o is None:
        o = CnfOrdinal(((ZERO, n),))
        if n < 256:
            _nat_cache[n] = o
    return o


ONE = nat(1)
W = CnfOrdinal(((ONE, 1),))


def cnf_cmp(a: CnfOrdinal, b: CnfOrdinal) -> int:
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        c = cnf_cmp(ea, eb)
        if c:
            return c
        if ca != cb:
            return -1 if ca < cb else 1
    la, lb = len(a.terms), len(b.terms)
    return (la > lb) - (la < lb)


def cnf_add(a: CnfOrdinal, b: CnfOrdinal) -> CnfOrdinal:
    if not b.terms:
        return a
    lead, lc = b.terms[0]
    keep = []
    for e, c in a.terms:
        cmp = cnf_cmp(e, lead)
        if cmp > 0:
            keep.append((e, c))
        elif cmp == 0:
            keep.append((e, c + lc))
            return CnfOrdinal(keep + list(b.terms[1:]))
        else:
            break
    return CnfOrdinal(keep + list(b.terms))


def cnf_mul(a: CnfOrdinal, b: CnfOrdinal) -> CnfOrdinal:
    if not a.terms or not b.terms:
        return ZERO
    a_lead, a_coef = a.terms[0]
    out = ZERO
    for e, c in b.terms:
        if e.is_zero():
            # a * c = w^a1 * (a_coef * c) + tail(a)
            piece = CnfOrdinal(((a_lead, a_coef * c),) + a.terms[1:])
        else:
            piece = CnfOrdinal(((cnf_add(a_lead, e), c),))
        out = cnf_add(out, piece)
    return out


def cnf_left_sub(a: CnfOrdinal, b: CnfOrdinal) -> CnfOrdinal:
    """The unique d with a + d = b; requires a <= b."""
    if cnf_cmp(a, b) > 0:
        raise OrdinalError(f"left subtraction needs a <= b, got a={a}, b={b}")
    A, B = a.terms, b.terms
    k = 0
    while k < len(A) and A[k] == B[k]:
        k += 1
    if k == len(A):
        return CnfOrdinal(B[k:])
    (ea, ca), (eb, cb) = A[k], B[k]
    if ea == eb:
        return CnfOrdinal(((eb, cb - ca),) + B[k + 1:])
    return CnfOrdinal(B[k:])


def cnf_divmod(a: CnfOrdinal, b: CnfOrdinal) -> tuple[CnfOrdinal, CnfOrdinal]:
    """Left division: the unique (q, r) with a = b*q + r and r < b."""
    if b.is_zero():
        raise ZeroDivisionError("ordinal division by zero")
    b_lead, b_coef = b.terms[0]
    q_terms: list = []
    rem = a
    while not rem < b:
        r_lead, r_coef = rem.terms[0]
        if r_lead == b_lead:
            n = r_coef // b_coef
            if n and cnf_cmp(b * n, rem) > 0:
                n -= 1
            if n == 0:
                break
            q_terms.append((ZERO, n))
            rem = cnf_left_sub(b * n, rem)
            break
        # r_lead > b_lead: b * w^e = w^(b_lead + e)
        e = cnf_left_sub(b_lead, r_lead)
        q_terms.append((e, r_coef))
        rem = cnf_left_sub(b * CnfOrdinal(((e, r_coef),)), rem)
    return CnfOrdinal(q_terms), rem


_TOKEN = re.compile(r"\s*(?:(\d+)|(w)|(\^)|(\*)|(\+)|(\()|(\)))")


def parse_ordinal(text: str) -> CnfOrdinal:
    """Parse ``w^2*3 + w + 5`` style syntax (exponents may be parenthesised)."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise OrdinalError(f"unexpected character at position {pos}: {text[pos:]!r}")
        kind = m.lastindex
        tokens.append((kind, m.group(kind), pos))
        pos = m.end()
    it = _Parser(tokens, text)
    result = it.expr()
    if it.i != len(tokens):
        raise OrdinalError(f"trailing input at position {tokens[it.i][2]}")
    return result


class _Parser:
    def __init__(self, tokens, text):
        self.t = tokens
        self.i = 0
        self.text = text

    def peek(self):
        return self.t[self.i][0] if self.i < len(self.t) else None

    def take(self, kind):
        if self.peek() != kind:
            where = self.t[self.i][2] if self.i < len(self.t) else len(self.text)
            raise OrdinalError(f"parse error at position {where}")
        tok = self.t[self.i]
        self.i += 1
        return tok[1]

    def expr(self):
        total = self.term()
        while self.peek() == 5:
            self.i += 1
            total = total + self.term()
        return total

    def term(self):
        if self.peek() == 1:
            return nat(int(self.take(1)))
        self.take(2)
        exp = ONE
        if self.peek() == 3:
            self.i += 1
            exp = self.atom()
        value = W ** exp
        if self.peek() == 4:
            self.i += 1
            value = value * nat(int(self.take(1)))
        return value

    def atom(self):
        if self.peek() == 6:
            self.i += 1
            e = self.expr()
            self.take(7)
            return e
        if self.peek() == 1:
            return nat(int(self.take(1)))
        self.take(2)
        return W


# step families

class StepFamily:
    """Family on [0, alpha) that is constant on each [previous cut, cut).

    Adjacent pieces with equal values are merged, so equal families have
    identical piece lists.
    """

    __slots__ = ("alpha", "pieces")

    def __init__(self, alpha: CnfOrdinal, pieces: Sequence[tuple[CnfOrdinal, CnfOrdinal]]):
        alpha = _coerce(alpha)
        clean: list = []
        prev = ZERO
        for cut, val in pieces:
            cut, val = _coerce(cut), _coerce(val)
            if not prev < cut:
                raise OrdinalError("step family cuts must be strictly increasing")
            if clean and clean[-1][1] == val:
                clean[-1] = (cut, val)
            else:
                clean.append((cut, val))
            prev = cut
        if alpha.is_zero():
            if clean:
                raise OrdinalError("family over 0 must have no pieces")
        elif not clean or clean[-1][0] != alpha:
            raise OrdinalError(f"last cut must equal the domain {alpha}")
        self.alpha = alpha
        self.pieces = tuple(clean)

    @classmethod
    def const(cls, alpha, value) -> "StepFamily":
        alpha = _coerce(alpha)
        return cls(alpha, [] if alpha.is_zero() else [(alpha, value)])

    def __call__(self, i) -> CnfOrdinal:
        i = _coerce(i)
        if not i < self.alpha:
            raise OrdinalError(f"index {i} outside [0, {self.alpha})")
        for cut, val in self.pieces:
            if i < cut:
                return val
        raise AssertionError("unreachable")

    def segments(self):
        """Yield (start, length, value) per piece."""
        start = ZERO
        for cut, val in self.pieces:
            yield start, cnf_left_sub(start, cut), val
            start = cut

    def map_values(self, fn) -> "StepFamily":
        return StepFamily(self.alpha, [(c, fn(v)) for c, v in self.pieces])

    def __eq__(self, other):
        return isinstance(other, StepFamily) and self.alpha == other.alpha and self.pieces == other.pieces

    def __hash__(self):
        return hash((self.alpha, self.pieces))

    def __repr__(self):
        inner = ", ".join(f"({c}, {v})" for c, v in self.pieces)
        return f"StepFamily({self.alpha}; [{inner}])"

    def to_json(self):
        return {"alpha": str(self.alpha), "pieces": [[str(c), str(v)] for c, v in self.pieces]}

    @classmethod
    def from_json(cls, obj) -> "StepFamily":
        return cls(parse_ordinal(obj["alpha"]), [(parse_ordinal(c), parse_ordinal(v)) for c, v in obj["pieces"]])


def ord_sum(alpha, f: StepFamily) -> CnfOrdinal:
    alpha = _coerce(alpha)
    if f.alpha != alpha:
        raise OrdinalError(f"family domain {f.alpha} does not match {alpha}")
    total = ZERO
    for _start, length, val in f.segments():
        total = total + val * length
    return total


def ord_partial_sum(f: StepFamily, i) -> CnfOrdinal:
    """Sum of f over [0, i) for i <= alpha."""
    i = _coerce(i)
    if i > f.alpha:
        raise OrdinalError(f"{i} exceeds the domain {f.alpha}")
    total = ZERO
    for start, length, val in f.segments():
        if not start < i:
            break
        end = cnf_add(start, length)
        seg = length if end <= i else cnf_left_sub(start, i)
        total = total + val * seg
    return total


def ord_flatten_eval(alpha, f: StepFamily, i, j) -> CnfOrdinal:
    alpha, i, j = _coerce(alpha), _coerce(i), _coerce(j)
    if f.alpha != alpha:
        raise OrdinalError("family domain mismatch")
    if not i < alpha:
        raise OrdinalError(f"outer index {i} not below {alpha}")
    if not j < f(i):
        raise OrdinalError(f"inner index {j} not below f({i}) = {f(i)}")
    return ord_partial_sum(f, i) + j


def ord_shift_restrict(g: StepFamily, start, length) -> StepFamily:
    """The family j -> g(start + j) on [0, length)."""
    start, length = _coerce(start), _coerce(length)
    end = start + length
    if end > g.alpha:
        raise OrdinalError("window exceeds the family domain")
    if length.is_zero():
        return StepFamily(ZERO, [])
    pieces = []
    for cut, val in g.pieces:
        if cut <= start:
            continue
        c = cut if cut < end else end
        pieces.append((cnf_left_sub(start, c), val))
        if not cut < end:
            break
    return StepFamily(length, pieces)


def ord_boxtimes(f: StepFamily, g: StepFamily) -> StepFamily:
    """(f (x) g)(i) = sum over j < f(i) of g(P(i) + j), P the partial sums of f.

    On a piece of f with value c starting at a, the window for a + t is
    [P(a) + c*t, P(a) + c*t + c).  It changes only where a cut of g lands on
    or inside a window, which left division by c locates.
    """
    total = ord_sum(f.alpha, f)
    if g.alpha != total:
        raise OrdinalError(f"g must live over the sum {total}, got {g.alpha}")
    pieces = []
    base = ZERO
    for start, length, c in f.segments():
        if c.is_zero():
            pieces.append((start + length, ZERO))
            continue
        span = c * length
        top = base + span
        breaks = {ZERO}
        for cut, _v in g.pieces:
            if base < cut < top:
                t, r = cnf_divmod(cnf_left_sub(base, cut), c)
                breaks.add(t)
                if not r.is_zero():
                    breaks.add(t + ONE)
        bs = sorted(b for b in breaks if b < length)
        bs.append(length)
        for lo, hi in zip(bs, bs[1:]):
            window_start = base + c * lo
            value = ord_sum(c, ord_shift_restrict(g, window_start, c))
            pieces.append((start + hi, value))
        base = top
    return StepFamily(f.alpha, pieces)


# random generation

def random_ordinal(rng: random.Random, height: int = 2, max_terms: int = 3, max_coef: int = 4) -> CnfOrdinal:
    """Random ordinal with exponent tower of height at most ``height``."""
    if height <= 0:
        return nat(rng.randint(0, max_coef))
    n = rng.randint(0, max_terms)
    exps = {random_ordinal(rng, height - 1, max_terms=2, max_coef=3) for _ in range(n)}
    terms = [(e, rng.randint(1, max_coef)) for e in sorted(exps, reverse=True)]
    return CnfOrdinal(terms)


def random_below(rng: random.Random, alpha: CnfOrdinal, max_coef: int = 4) -> CnfOrdinal:
    """A random ordinal strictly below ``alpha`` (which must be positive)."""
    if alpha.is_zero():
        raise OrdinalError("nothing lies below 0")
    k = rng.randrange(len(alpha.terms))
    prefix = list(alpha.terms[:k])
    e, c = alpha.terms[k]
    # prefix + w^e*head + (something below w^e), with head < c
    head = rng.randint(0, c - 1)
    if head:
        prefix.append((e, head))
    if e.is_zero():
        return CnfOrdinal(prefix)
    return CnfOrdinal(prefix) + _random_below_power(rng, e, max_coef)


def _random_below_power(rng, e: CnfOrdinal, max_coef: int) -> CnfOrdinal:
    """Random ordinal below w^e (e > 0)."""
    terms = []
    bound = e
    for _ in range(rng.randint(0, 2)):
        if bound.is_zero():
            break
        ex = random_below(rng, bound, max_coef)
        terms.append((ex, rng.randint(1, max_coef)))
        bound = ex
    return CnfOrdinal(terms)


def random_step_family(rng: random.Random, alpha: CnfOrdinal, max_pieces: int = 3,
                       value_height: int = 1, allow_zero: bool = True) -> StepFamily:
    if alpha.is_zero():
        return StepFamily(ZERO, [])
    cuts = {random_below(rng, alpha) for _ in range(rng.randint(0, max_pieces - 1))}
    cuts.discard(ZERO)
    cuts = sorted(cuts) + [alpha]
    pieces = []
    for cut in cuts:
        while True:
            v = random_ordinal(rng, value_height, max_terms=2, max_coef=3)
            if allow_zero or not v.is_zero():
                break
        pieces.append((cut, v))
    return StepFamily(alpha, pieces)


# the Ord adder

def ord_fiber(alpha) -> "FiberDescriptor":
    alpha = _coerce(alpha)
    return FiberDescriptor("ordinal-segment", alpha=alpha,
                           sampler=lambda rng, a=alpha: random_below(rng, a))


def _step(f: StepFamily) -> "Family":
    return Family(ord_fiber(f.alpha), f, "step", f)


def _ord_family_equality(h, f, rng):
    if h.data == f.data:
        return None
    for p in (random_below(rng, f.data.alpha) for _ in range(8)):
        if h(p) != f(p):
            return p, h(p), f(p)
    return "pieces", h.data, f.data


def _ord_const_bifamily(value) -> "Family":
    value = _coerce(value)
    dom = FiberDescriptor("product", components=(FiberDescriptor.finite(()), FiberDescriptor.finite(())))
    return Family(dom, lambda _p, v=value: v, "const", value)


def _ord_partial_sum(x, y, F, over):
    # only constant bifamilies are represented: sum over [0, x) of c is c*x
    c = F.data
    if over == "x":
        return _step(StepFamily.const(y, c * _coerce(x)))
    return _step(StepFamily.const(x, c * _coerce(y)))


def ord_fubini_counterexamples():
    """Constant families on [0, x) x [0, y) whose iterated sums differ."""
    return [(nat(2), W, _ord_const_bifamily(ONE)),
            (W, nat(3), _ord_const_bifamily(ONE)),
            (nat(2), W ** 2, _ord_const_bifamily(nat(2)))]


def _ord_serialize(obj):
    if isinstance(obj, CnfOrdinal):
        return str(obj)
    if isinstance(obj, StepFamily):
        return obj.to_json()
    if isinstance(obj, Family):
        return _ord_serialize(obj.data)
    if isinstance(obj, (tuple, list)):
        return [_ord_serialize(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _ord_serialize(v) for k, v in obj.items()}
    return default_serialize(obj)


def make_ord_adder(name: str = "ord", value_height: int = 1) -> "AdderInstance":
    """Ordinals below epsilon_0 with step families; sums are ordered sums,
    so Fubini fails and the instance is flagged non-commutative."""

    def fam(alpha, rng):
        return _step(random_step_family(rng, alpha, value_height=value_height))

    def pullback(x, f, g, i):
        return _step(ord_shift_restrict(g.data, ord_partial_sum(f.data, i), f.data(i)))

    return AdderInstance(
        name=name,
        elem_kind="ordinals below epsilon_0",
        unit_elem=ONE,
        zero_elem=ZERO,
        has_zero=True,
        fiber_of=ord_fiber,
        sum_op=lambda x, f: ord_sum(x, f.data),
        flatten_op=lambda x, f, p: ord_flatten_eval(x, f.data, p.outer, p.inner),
        equality=EqualityNotion.exact(),
        elem_gen=lambda rng: random_ordinal(rng, height=2),
        family_gen=fam,
        commutative_flag=False,
        const_family_op=lambda x, v: _step(StepFamily.const(x, v)),
        boxtimes_op=lambda x, f, g: _step(ord_boxtimes(f.data, g.data)),
        pullback_op=pullback,
        partial_sum_op=_ord_partial_sum,
        family_equality=_ord_family_equality,
        fubini_counterexamples=ord_fubini_counterexamples,
        scale_family_op=lambda y, f: _step(f.data.map_values(lambda v: cnf_mul(_coerce(y), v))),
        serializer=_ord_serialize,
        description="ordered transfinite sums of step families; non-commutative",
    )


def ord_sum_recursion(alpha: int, f) -> CnfOrdinal:
    """Direct recursion sum_{a+1} f = (sum_a f) + f(a) for finite alpha; the
    oracle the closed form is compared against."""
    total = ZERO
    for a in range(alpha):
        total = cnf_add(total, _coerce(f(nat(a))))
    return total
