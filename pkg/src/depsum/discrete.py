"""Adders on discrete carriers: naturals, integers, the two-element set F1,
and the degenerate adder of a monoid, plus their right modules."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Sequence

from .core import (
    AdderInstance,
    EqualityNotion,
    Family,
    FiberDescriptor,
    FlatPair,
    RightModuleInstance,
    default_serialize,
)
from .arith import RationalPoly, sum_operator

INT_WINDOW = 8
WORD_CAP = 6


def table_family(values: Sequence, domain: FiberDescriptor | None = None) -> Family:
    """Family on [n] = {1..n} given by a list of values."""
    vals = tuple(values)
    if domain is None:
        domain = nat_fiber(len(vals))
    elif domain.kind == "finite" and len(domain.points) != len(vals):
        raise ValueError(f"table of length {len(vals)} on a fiber of {len(domain.points)} points")

    def ev(i):
        if not (isinstance(i, int) and 1 <= i <= len(vals)):
            raise IndexError(f"index {i!r} outside [1, {len(vals)}]")
        return vals[i - 1]
    return Family(domain, ev, "table", vals)


def as_table(f) -> tuple:
    if isinstance(f, Family):
        if f.rep == "table":
            return f.data
        return tuple(f(i) for i in f.domain.enumerate())
    return tuple(f)


# naturals

@lru_cache(maxsize=512)
def nat_fiber(n: int) -> FiberDescriptor:
    if n < 0:
        raise ValueError(f"natural numbers only, got {n}")
    return FiberDescriptor.finite(range(1, n + 1))


def nat_sum(x: int, f) -> int:
    vals = as_table(f)
    if len(vals) != x:
        raise ValueError(f"family has {len(vals)} entries, expected {x}")
    return sum(vals)


def nat_flatten(x: int, f, i: int, j: int) -> int:
    vals = as_table(f)
    if len(vals) != x:
        raise ValueError(f"family has {len(vals)} entries, expected {x}")
    if not 1 <= i <= x:
        raise IndexError(f"outer index {i} outside [1, {x}]")
    if not 1 <= j <= vals[i - 1]:
        raise IndexError(f"inner index {j} outside [1, {vals[i - 1]}]")
    return j + sum(vals[: i - 1])


def nat_boxtimes(x: int, f, g) -> tuple:
    """Table of (f (x) g)(i) = sum of the block of g sitting over i."""
    fv, gv = as_table(f), as_table(g)
    if len(gv) != sum(fv):
        raise ValueError("g must live over the fiber of sum(f)")
    out, pos = [], 0
    for a in fv:
        out.append(sum(gv[pos:pos + a]))
        pos += a
    return tuple(out)


def _nat_elem(rng: random.Random) -> int:
    return rng.choice((0, 1, 1, 2, 2, 3, 3, 4, 5, 6, 7, 8))


def _nat_family(x: int, rng: random.Random) -> Family:
    return table_family([rng.randint(0, 5) for _ in range(x)])


def _nat_bifamily(x: int, y: int, rng: random.Random) -> Family:
    table = {(j, i): rng.randint(0, 6) for j in range(1, y + 1) for i in range(1, x + 1)}
    dom = FiberDescriptor("product", components=(nat_fiber(y), nat_fiber(x)))
    return Family(dom, table.__getitem__, "table", tuple(sorted(table.items())))


def _nat_fubini_counterexamples():
    return []


def make_nat_adder(name: str = "nat") -> AdderInstance:
    return AdderInstance(
        name=name,
        elem_kind="natural numbers",
        unit_elem=1,
        zero_elem=0,
        has_zero=True,
        fiber_of=nat_fiber,
        sum_op=lambda x, f: nat_sum(x, f),
        flatten_op=lambda x, f, p: nat_flatten(x, f, p.outer, p.inner),
        equality=EqualityNotion.exact(),
        elem_gen=_nat_elem,
        family_gen=_nat_family,
        commutative_flag=True,
        const_family_op=lambda x, v: table_family([v] * x),
        boxtimes_op=lambda x, f, g: table_family(nat_boxtimes(x, f, g)),
        bifamily_gen=_nat_bifamily,
        description="finite sums of naturals; fiber of n is {1..n}",
    )


# integers

def int_partial(f, n: int) -> int:
    """Signed partial sum S(n): sum f(1..n) for n >= 0, -sum f(n+1..0) otherwise.
    S(n) - S(n-1) = f(n) for every integer n."""
    data = f.data if isinstance(f, Family) else None
    if isinstance(data, IntSeq):
        return data.partial(n)
    return _loop_partial(f, n)


def _loop_partial(f, n: int) -> int:
    if n >= 0:
        return sum(f(k) for k in range(1, n + 1))
    return -sum(f(k) for k in range(n + 1, 1))


def int_sum(x: int, f) -> int:
    return int_partial(f, x)


def int_flatten(x: int, f, i: int, j: int) -> int:
    return j + int_partial(f, i - 1)


def _int_sampler(rng: random.Random) -> int:
    return rng.randint(-INT_WINDOW, INT_WINDOW)


INT_FIBER = FiberDescriptor("integer-line", sampler=_int_sampler,
                            grid=tuple(range(-INT_WINDOW, INT_WINDOW + 1)))


class IntSeq:
    """Integer-valued sequence on all of Z with a signed partial-sum method."""

    def __call__(self, i: int) -> int:
        raise NotImplementedError

    def partial(self, n: int) -> int:
        return _loop_partial(self, n)


class IntPolyPeriodic(IntSeq):
    """i -> sum c_k i^k + periodic[i mod len(periodic)].

    Partial sums are closed form: the Faulhaber transform of the polynomial
    part telescopes correctly for negative n as well, and the periodic part
    counts whole periods."""

    def __init__(self, coeffs: Sequence[int], periodic: Sequence[int]):
        self.coeffs = tuple(coeffs)
        self.periodic = tuple(periodic) or (0,)
        poly = RationalPoly.from_coeffs(self.coeffs)
        self._sum_poly = sum_operator(poly)

    def __call__(self, i: int) -> int:
        return sum(c * i ** k for k, c in enumerate(self.coeffs)) + self.periodic[i % len(self.periodic)]

    def partial(self, n: int) -> int:
        val = self._sum_poly(n)
        assert val.denominator == 1
        per, L = self.periodic, len(self.periodic)
        total = sum(per)
        if n >= 0:
            q, r = divmod(n, L)
            return int(val) + q * total + sum(per[k % L] for k in range(1, r + 1))
        q, r = divmod(-n, L)
        return int(val) - q * total - sum(per[k % L] for k in range(n + 1, n + 1 + r))

    def __eq__(self, other):
        return isinstance(other, IntPolyPeriodic) and (self.coeffs, self.periodic) == (other.coeffs, other.periodic)

    def __hash__(self):
        return hash((self.coeffs, self.periodic))

    def to_json(self):
        return {"coeffs": list(self.coeffs), "periodic": list(self.periodic)}


class IntShift(IntSeq):
    """j -> base(j + c), the reindexed family over an inner fiber."""

    def __init__(self, base, c: int):
        self.base, self.c = base, c

    def __call__(self, j):
        return self.base(j + self.c)

    def partial(self, n):
        return int_partial(self.base, n + self.c) - int_partial(self.base, self.c)

    def to_json(self):
        return {"shift": self.c, "of": default_serialize(self.base)}


class IntBoxtimes(IntSeq):
    """i -> sum over f(i) of g shifted past the first i-1 blocks.  Partial
    sums are computed by looping over i, so sum associativity remains a
    genuine identity rather than a definition."""

    def __init__(self, f: Family, g: Family):
        self.f, self.g = f, g
        self._cache = {}

    def __call__(self, i):
        if i not in self._cache:
            c = int_partial(self.f, i - 1)
            self._cache[i] = int_partial(Family(INT_FIBER, IntShift(self.g, c), "shift", IntShift(self.g, c)), self.f(i))
        return self._cache[i]

    def to_json(self):
        return {"boxtimes": [default_serialize(self.f), default_serialize(self.g)]}


def _int_fam(seq: IntSeq) -> Family:
    return Family(INT_FIBER, seq, "polynomial" if isinstance(seq, IntPolyPeriodic) else "closure", seq)


def int_family(coeffs=(0,), periodic=(0,)) -> Family:
    return _int_fam(IntPolyPeriodic(coeffs, periodic))


def _int_family_gen(x: int, rng: random.Random) -> Family:
    deg = rng.choice((0, 0, 1, 1, 2))
    coeffs = [rng.randint(-3, 3) for _ in range(deg + 1)]
    per = [rng.randint(-3, 3) for _ in range(rng.randint(1, 3))]
    return int_family(coeffs, per)


def _int_bifamily(x: int, y: int, rng: random.Random) -> Family:
    a, b, c, d = (rng.randint(-3, 3) for _ in range(4))
    table = tuple(rng.randint(-2, 2) for _ in range(4))
    dom = FiberDescriptor("product", components=(INT_FIBER, INT_FIBER))

    def ev(p):
        j, i = p
        return a * i * j + b * i + c * j + d + table[(i + 2 * j) % 4]
    return Family(dom, ev, "closure", (a, b, c, d, table))


def make_int_adder(name: str = "int") -> AdderInstance:
    return AdderInstance(
        name=name,
        elem_kind="integers",
        unit_elem=1,
        zero_elem=0,
        has_zero=True,
        fiber_of=lambda x: INT_FIBER,
        sum_op=int_sum,
        flatten_op=lambda x, f, p: int_flatten(x, f, p.outer, p.inner),
        equality=EqualityNotion.exact(),
        elem_gen=lambda rng: rng.randint(-INT_WINDOW, INT_WINDOW),
        family_gen=_int_family_gen,
        commutative_flag=True,
        const_family_op=lambda x, v: int_family((v,)),
        boxtimes_op=lambda x, f, g: _int_fam(IntBoxtimes(f, g)),
        pullback_op=lambda x, f, g, i: _int_fam(IntShift(g, int_partial(f, i - 1))),
        bifamily_gen=_int_bifamily,
        description="signed sums of integer families; fibers are the whole integer line",
    )


# F1 = {0, 1}

F1_FIBERS = {0: FiberDescriptor.finite(()), 1: FiberDescriptor.finite((1,))}


def f1_fiber(x: int) -> FiberDescriptor:
    if x not in (0, 1):
        raise ValueError(f"F1 has elements 0 and 1, got {x!r}")
    return F1_FIBERS[x]


def f1_family(x: int, b: int | None = None) -> Family:
    if x == 0:
        if b is not None:
            raise ValueError("the family over 0 is empty")
        return table_family((), F1_FIBERS[0])
    if b not in (0, 1):
        raise ValueError(f"a family over 1 takes a value in {{0, 1}}, got {b!r}")
    return table_family((b,), F1_FIBERS[1])


def f1_sum(x: int, f) -> int:
    vals = as_table(f)
    if x == 0:
        if vals:
            raise ValueError("the family over 0 must be empty")
        return 0
    if x != 1 or len(vals) != 1 or vals[0] not in (0, 1):
        raise ValueError(f"malformed F1 family over {x!r}: {vals!r}")
    return vals[0]


def f1_families(x: int) -> list:
    return [f1_family(0)] if x == 0 else [f1_family(1, 0), f1_family(1, 1)]


def f1_all_cases():
    """Every (x, f, g) with g over the fiber of sum(f)."""
    for x in (0, 1):
        for f in f1_families(x):
            for g in f1_families(f1_sum(x, f)):
                yield x, f, g


def _f1_flatten(x, f, p: FlatPair):
    if x != 1 or p.outer != 1 or as_table(f)[0] != 1 or p.inner != 1:
        raise IndexError("F1 flattening is only defined at ((1, 1))")
    return 1


def make_f1_adder(name: str = "f1") -> AdderInstance:
    def bifam(x, y, rng):
        dom = FiberDescriptor("product", components=(f1_fiber(y), f1_fiber(x)))
        v = rng.randint(0, 1)
        return Family(dom, lambda p, v=v: v, "table", v)
    return AdderInstance(
        name=name,
        elem_kind="the two-element set {0, 1}",
        unit_elem=1,
        zero_elem=0,
        has_zero=True,
        fiber_of=f1_fiber,
        sum_op=f1_sum,
        flatten_op=_f1_flatten,
        equality=EqualityNotion.exact(),
        elem_gen=lambda rng: rng.randint(0, 1),
        family_gen=lambda x, rng: rng.choice(f1_families(x)),
        commutative_flag=True,
        const_family_op=lambda x, v: f1_family(x) if x == 0 else f1_family(1, v),
        bifamily_gen=bifam,
        exhaustive_cases=lambda: list(f1_all_cases()),
        description="the field with one element: 0 has the empty fiber, 1 a single point",
    )


# monoids

@dataclass(frozen=True)
class FiniteMonoid:
    """A monoid given by its multiplication table; ``mul(a, b)`` is a*b."""
    elements: tuple
    table: tuple   # table[i][j] = index of elements[i] * elements[j]
    unit: Any

    def __post_init__(self):
        n = len(self.elements)
        idx = {e: k for k, e in enumerate(self.elements)}
        if len(idx) != n:
            raise ValueError("duplicate monoid elements")
        if self.unit not in idx:
            raise ValueError("unit is not an element")
        u = idx[self.unit]
        for a in range(n):
            if self.table[u][a] != a or self.table[a][u] != a:
                raise ValueError("unit law fails")
        for a, b, c in itertools.product(range(n), repeat=3):
            if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                raise ValueError(f"associativity fails at {self.elements[a], self.elements[b], self.elements[c]}")
        object.__setattr__(self, "_index", idx)

    def mul(self, a, b):
        return self.elements[self.table[self._index[a]][self._index[b]]]

    def is_commutative(self) -> bool:
        n = len(self.elements)
        return all(self.table[a][b] == self.table[b][a] for a in range(n) for b in range(n))

    @classmethod
    def from_operation(cls, elements, op, unit) -> "FiniteMonoid":
        elements = tuple(elements)
        idx = {e: k for k, e in enumerate(elements)}
        table = tuple(tuple(idx[op(a, b)] for b in elements) for a in elements)
        return cls(elements, table, unit)


def cyclic_monoid(n: int) -> FiniteMonoid:
    return FiniteMonoid.from_operation(range(n), lambda a, b: (a + b) % n, 0)


def transformation_monoid(gens: Sequence[tuple], k: int) -> FiniteMonoid:
    """Monoid of self-maps of {0..k-1} generated by ``gens`` under
    composition; a*b means apply b first, then a."""
    ident = tuple(range(k))
    comp = lambda a, b: tuple(a[b[t]] for t in range(k))
    elems = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                h = comp(g, e)
                if h not in elems:
                    elems.add(h)
                    nxt.append(h)
        frontier = nxt
    return FiniteMonoid.from_operation(sorted(elems), comp, ident)


def random_finite_monoid(rng: random.Random) -> FiniteMonoid:
    kind = rng.choice(("cyclic", "mult", "transform", "transform"))
    if kind == "cyclic":
        return cyclic_monoid(rng.randint(1, 7))
    if kind == "mult":
        n = rng.randint(2, 7)
        return FiniteMonoid.from_operation(range(n), lambda a, b: (a * b) % n, 1)
    k = rng.randint(2, 3)
    gens = [tuple(rng.randrange(k) for _ in range(k)) for _ in range(rng.randint(1, 2))]
    return transformation_monoid(gens, k)


class FreeMonoid:
    """Words over a finite alphabet under concatenation."""

    def __init__(self, alphabet: str = "ab", word_cap: int = WORD_CAP):
        self.alphabet = alphabet
        self.word_cap = word_cap
        self.unit = ""

    def mul(self, a: str, b: str) -> str:
        return a + b

    def random(self, rng: random.Random, max_len: int | None = None) -> str:
        n = rng.randint(0, self.word_cap if max_len is None else max_len)
        return "".join(rng.choice(self.alphabet) for _ in range(n))

    def words(self, max_len: int):
        for n in range(max_len + 1):
            for w in itertools.product(self.alphabet, repeat=n):
                yield "".join(w)

    def is_commutative(self) -> bool:
        return len(self.alphabet) <= 1


SINGLETON = FiberDescriptor.finite((1,))


def monoid_adder_sum(monoid, x, f):
    """Sum over the one-point fiber of x: the value y = f(1) multiplied on
    the left, y * x."""
    y = f(1) if isinstance(f, Family) else f
    return monoid.mul(y, x)


def make_monoid_adder(monoid=None, name: str = "monoid") -> AdderInstance:
    mon = monoid if monoid is not None else FreeMonoid()
    if isinstance(mon, FreeMonoid):
        gen = lambda rng: mon.random(rng, 3)
    else:
        gen = lambda rng: rng.choice(mon.elements)

    def fam(x, rng):
        return table_family((gen(rng),), SINGLETON)

    def bifam(x, y, rng):
        v = gen(rng)
        dom = FiberDescriptor("product", components=(SINGLETON, SINGLETON))
        return Family(dom, lambda p, v=v: v, "table", v)

    def counterexamples():
        if isinstance(mon, FreeMonoid):
            cands = [(a, b) for a in mon.words(2) for b in mon.words(2)]
        else:
            cands = list(itertools.product(mon.elements, repeat=2))
        dom = FiberDescriptor("product", components=(SINGLETON, SINGLETON))
        return [(a, b, Family(dom, lambda p: mon.unit, "table", mon.unit)) for a, b in cands]

    return AdderInstance(
        name=name,
        elem_kind="monoid elements" if not isinstance(mon, FreeMonoid) else f"words over {mon.alphabet!r}",
        unit_elem=mon.unit,
        fiber_of=lambda x: SINGLETON,
        sum_op=lambda x, f: monoid_adder_sum(mon, x, f),
        flatten_op=lambda x, f, p: 1,
        equality=EqualityNotion.exact(),
        elem_gen=gen,
        family_gen=fam,
        commutative_flag=mon.is_commutative(),
        const_family_op=lambda x, v: table_family((v,), SINGLETON),
        bifamily_gen=bifam,
        fubini_counterexamples=counterexamples,
        description="every fiber is a point and the sum of <y> over x is y*x",
    )


# right modules

def nat_module_from_monoid(monoid: FiniteMonoid, base: AdderInstance | None = None,
                           name: str = "nat-monoid") -> RightModuleInstance:
    """A monoid as a right module over the naturals: the sum over n of
    (m_1, ..., m_n) is the ordered product m_1 * ... * m_n."""
    base = base if base is not None else make_nat_adder()

    def msum(x, f):
        vals = as_table(f)
        if len(vals) != x:
            raise ValueError(f"family has {len(vals)} entries, expected {x}")
        out = monoid.unit
        for m in vals:
            out = monoid.mul(out, m)
        return out

    return RightModuleInstance(
        name=name,
        base=base,
        elem_kind="monoid elements",
        msum_op=msum,
        equality=EqualityNotion.exact(),
        melem_gen=lambda rng: rng.choice(monoid.elements),
        mfamily_gen=lambda x, rng: table_family([rng.choice(monoid.elements) for _ in range(x)]),
        const_mfamily_op=lambda x, m: table_family([m] * x),
        map_family_op=lambda f, phi: table_family([phi(v) for v in as_table(f)], f.domain),
        description="a finite monoid with ordered products as sums",
    )


def monoid_from_nat_module(mod: RightModuleInstance, elements: Sequence) -> FiniteMonoid:
    """Recover the monoid: unit = empty sum, a*b = sum over 2 of <a, b>."""
    unit = mod.msum_op(0, table_family(()))
    return FiniteMonoid.from_operation(elements, lambda a, b: mod.msum_op(2, table_family((a, b))), unit)


def additive_nat_module(base: AdderInstance | None = None, name: str = "nat-additive") -> RightModuleInstance:
    """(N, +) as a module over the naturals; carrier unbounded."""
    base = base if base is not None else make_nat_adder()
    return RightModuleInstance(
        name=name,
        base=base,
        elem_kind="natural numbers under +",
        msum_op=lambda x, f: nat_sum(x, f),
        equality=EqualityNotion.exact(),
        melem_gen=lambda rng: rng.randint(0, 20),
        mfamily_gen=lambda x, rng: table_family([rng.randint(0, 20) for _ in range(x)]),
        const_mfamily_op=lambda x, m: table_family([m] * x),
        map_family_op=lambda f, phi: table_family([phi(v) for v in as_table(f)], f.domain),
    )


@dataclass(frozen=True)
class PointedSet:
    elements: tuple
    basepoint: Any

    def __post_init__(self):
        if self.basepoint not in self.elements:
            raise ValueError("basepoint must be an element")


def f1_pointed_module(pointed: PointedSet | None = None, base: AdderInstance | None = None,
                      name: str = "f1-pointed") -> RightModuleInstance:
    """Pointed set as an F1-module: the empty sum is the basepoint and the
    sum over 1 of <m> is m."""
    ps = pointed if pointed is not None else PointedSet(("*", "a", "b", "c"), "*")
    base = base if base is not None else make_f1_adder()

    def msum(x, f):
        vals = as_table(f)
        if x == 0:
            if vals:
                raise ValueError("the family over 0 must be empty")
            return ps.basepoint
        if len(vals) != 1:
            raise ValueError("malformed family over 1")
        return vals[0]

    def mfam(x, rng):
        if x == 0:
            return table_family((), F1_FIBERS[0])
        return table_family((rng.choice(ps.elements),), F1_FIBERS[1])

    return RightModuleInstance(
        name=name,
        base=base,
        elem_kind="pointed set",
        msum_op=msum,
        equality=EqualityNotion.exact(),
        melem_gen=lambda rng: rng.choice(ps.elements),
        mfamily_gen=mfam,
        const_mfamily_op=lambda x, m: table_family(() if x == 0 else (m,), f1_fiber(x)),
        map_family_op=lambda f, phi: table_family([phi(v) for v in as_table(f)], f.domain),
    )


def exhaustive_nat_tables(max_len: int, max_entry: int):
    for n in range(max_len + 1):
        yield from itertools.product(range(max_entry + 1), repeat=n)


__all__ = [
    "INT_WINDOW",
    "table_family",
    "as_table",
    "nat_fiber",
    "nat_sum",
    "nat_flatten",
    "nat_boxtimes",
    "make_nat_adder",
    "int_partial",
    "int_sum",
    "int_flatten",
    "int_family",
    "IntSeq",
    "IntPolyPeriodic",
    "INT_FIBER",
    "make_int_adder",
    "f1_fiber",
    "f1_family",
    "f1_families",
    "f1_sum",
    "f1_all_cases",
    "make_f1_adder",
    "FiniteMonoid",
    "FreeMonoid",
    "cyclic_monoid",
    "transformation_monoid",
    "random_finite_monoid",
    "monoid_adder_sum",
    "make_monoid_adder",
    "nat_module_from_monoid",
    "monoid_from_nat_module",
    "additive_nat_module",
    "PointedSet",
    "f1_pointed_module",
    "exhaustive_nat_tables",
]
