"""Dependent adder interface and the generic axiom harness.

An adder packages a carrier, a unit, fibers, a sum operator and flattening
maps.  The ``check_*`` functions exercise the axioms through that surface
only; instances may supply structure-aware hooks (for instance a symbolic
``boxtimes``) but the harness never looks inside a family's payload.
"""
from __future__ import annotations

import cmath
import hashlib
import math
import os
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable

import numpy as np

__all__ = [
    "FiberDescriptor",
    "Family",
    "FlatPair",
    "EqualityNotion",
    "CheckResult",
    "AdderInstance",
    "RightModuleInstance",
    "LeftModuleInstance",
    "Skip",
    "max_size",
    "case_rng",
    "derive_seed",
    "check_right_unit",
    "check_left_unit",
    "check_sum_assoc",
    "check_flatten_assoc",
    "check_fubini",
    "check_zero",
    "check_naturality",
    "check_right_module",
    "check_left_module",
    "check_linear_map",
    "check_boxtimes_assoc",
    "AXIOMS",
    "default_serialize",
    "drive_cases",
    "failure_record",
]

AXIOMS = ("right_unit", "left_unit", "sum_assoc", "flatten_assoc", "fubini", "zero", "naturality")

FIBER_KINDS = frozenset({
    "finite",          # explicit point list
    "interval",        # real [lo, hi]
    "ordinal-segment",  # ordinals below alpha
    "categorical",     # objects of a finite category
    "padic-line",      # all of Z_q, sampled
    "integer-line",    # all of Z, sampled on a window
    "affine-line",     # the affine line over Q (or Q[u]), sampled
    "product",         # pairs from two fibers
})


def max_size(default: int) -> int:
    """Catalog size cap, overridable through DEPSUM_MAX_SIZE."""
    raw = os.environ.get("DEPSUM_MAX_SIZE")
    if raw is None:
        return default
    try:
        val = int(raw)
    except ValueError:
        raise ValueError(f"DEPSUM_MAX_SIZE must be an integer, got {raw!r}") from None
    if val < 1:
        raise ValueError("DEPSUM_MAX_SIZE must be positive")
    return val


class Skip(Exception):
    """Raised by generators for a case that cannot be built (size caps,
    empty fibers); the harness counts it and draws another case."""


def derive_seed(seed: int, *labels) -> int:
    h = hashlib.blake2b(repr((seed,) + labels).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


def case_rng(seed: int, *labels) -> random.Random:
    return random.Random(derive_seed(seed, *labels))


@dataclass(frozen=True, eq=False)
class FiberDescriptor:
    kind: str
    points: tuple | None = None
    lo: Any = None
    hi: Any = None
    alpha: Any = None
    category: Any = None
    sampler: Callable[[random.Random], Any] | None = None
    grid: tuple | None = None
    components: tuple | None = None

    def __post_init__(self):
        if self.kind not in FIBER_KINDS:
            raise ValueError(f"unknown fiber kind {self.kind!r}")
        if self.kind == "finite":
            pts = tuple(self.points or ())
            if len(set(pts)) != len(pts):
                raise ValueError("finite fiber enumerates duplicates")
            object.__setattr__(self, "points", pts)
        if self.kind == "interval" and not self.lo <= self.hi:
            raise ValueError(f"interval fiber needs lo <= hi, got [{self.lo}, {self.hi}]")

    @classmethod
    def finite(cls, points: Iterable) -> "FiberDescriptor":
        return cls("finite", points=tuple(points))

    def is_empty(self) -> bool:
        if self.kind == "finite":
            return not self.points
        if self.kind == "ordinal-segment":
            return self.alpha.is_zero()
        if self.kind == "categorical":
            return not self.category.objects
        if self.kind == "product":
            return any(c.is_empty() for c in self.components)
        return False

    def enumerate(self) -> tuple:
        if self.kind == "finite":
            return self.points
        if self.kind == "categorical":
            return tuple(self.category.objects)
        if self.kind == "product":
            a, b = (c.enumerate() for c in self.components)
            return tuple((p, q) for p in a for q in b)
        raise TypeError(f"{self.kind} fibers are not enumerable")

    def sample(self, rng: random.Random):
        if self.is_empty():
            raise Skip("empty fiber")
        if self.sampler is not None:
            return self.sampler(rng)
        if self.kind in ("finite", "categorical"):
            return rng.choice(self.enumerate())
        if self.kind == "interval":
            return rng.uniform(self.lo, self.hi)
        if self.kind == "product":
            return tuple(c.sample(rng) for c in self.components)
        raise TypeError(f"no sampler for {self.kind} fiber")

    def check_points(self, rng: random.Random, k: int = 12) -> list:
        """Points used for pointwise comparison of families."""
        if self.is_empty():
            return []
        if self.grid is not None:
            return list(self.grid)
        if self.kind in ("finite", "categorical"):
            pts = self.enumerate()
            return list(pts) if len(pts) <= 64 else [rng.choice(pts) for _ in range(k)]
        if self.kind == "interval":
            # 33 interior points plus both endpoints
            n = 34
            return [self.lo + (self.hi - self.lo) * t / n for t in range(n + 1)]
        return [self.sample(rng) for _ in range(k)]


@dataclass(frozen=True, eq=False)
class Family:
    """A family of elements indexed by the points of ``domain``.

    ``rep`` tags the representation (table, closure, polynomial, step,
    functor, analytic, ...); ``data`` carries the structured payload that the
    owning instance understands.
    """
    domain: FiberDescriptor
    eval: Callable[[Any], Any]
    rep: str = "closure"
    data: Any = None

    def __call__(self, point):
        return self.eval(point)

    def with_domain(self, domain: FiberDescriptor) -> "Family":
        return Family(domain, self.eval, self.rep, self.data)


@dataclass(frozen=True)
class FlatPair:
    outer: Any
    inner: Any


def _num_close(a, b, tol) -> bool:
    if isinstance(a, (np.ndarray, tuple, list)) or isinstance(b, np.ndarray):
        a = np.asarray(a)
        b = np.asarray(b)
        if a.shape != b.shape:
            return False
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            return False
        scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
        return float(np.max(np.abs(a - b), initial=0.0)) <= tol * scale
    if isinstance(a, complex) or isinstance(b, complex):
        if not (cmath.isfinite(a) and cmath.isfinite(b)):
            return False
    elif not (math.isfinite(a) and math.isfinite(b)):
        return False
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class EqualityNotion:
    """How two elements are compared: exactly, within a tolerance, or up to
    an isomorphism found by ``checker`` (which returns a witness or None)."""
    kind: str
    tol: float = 0.0
    checker: Callable[[Any, Any], Any] | None = None

    def __post_init__(self):
        if self.kind not in ("exact", "epsilon", "isomorphism"):
            raise ValueError(f"unknown equality kind {self.kind!r}")
        if self.kind == "epsilon" and not self.tol > 0:
            raise ValueError("epsilon equality needs tol > 0")
        if self.kind == "isomorphism" and self.checker is None:
            raise ValueError("isomorphism equality needs a checker")

    @classmethod
    def exact(cls, checker=None) -> "EqualityNotion":
        """Exact equality; a checker may restrict the comparison to the
        trusted part of a truncated representation."""
        return cls("exact", checker=checker)

    @classmethod
    def epsilon(cls, tol: float) -> "EqualityNotion":
        return cls("epsilon", tol=tol)

    @classmethod
    def isomorphism(cls, checker) -> "EqualityNotion":
        return cls("isomorphism", checker=checker)

    def eq(self, a, b) -> bool:
        if self.kind == "exact":
            return a == b if self.checker is None else self.checker(a, b) is not None
        if self.kind == "epsilon":
            return _num_close(a, b, self.tol)
        return self.checker(a, b) is not None

    def with_tol(self, tol: float) -> "EqualityNotion":
        return EqualityNotion("epsilon", tol=tol) if self.kind == "epsilon" else self


def default_serialize(obj) -> Any:
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (tuple, list)):
        return [default_serialize(x) for x in obj]
    if isinstance(obj, dict):
        return {str(k): default_serialize(v) for k, v in obj.items()}
    if isinstance(obj, Family):
        return {"family": obj.rep, "data": default_serialize(obj.data) if obj.data is not None else None}
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if hasattr(obj, "tolist"):
        return default_serialize(obj.tolist())
    return str(obj)


@dataclass
class CheckResult:
    axiom: str
    instance: str = ""
    cases_run: int = 0
    failures: list = field(default_factory=list)
    skipped: int = 0
    partial: bool = False
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def merge(self, other: "CheckResult") -> "CheckResult":
        self.cases_run += other.cases_run
        self.failures.extend(other.failures)
        self.skipped += other.skipped
        self.partial = self.partial or other.partial
        self.notes.extend(other.notes)
        return self

    def to_json(self) -> dict:
        return {
            "instance": self.instance,
            "axiom": self.axiom,
            "cases_run": self.cases_run,
            "skipped": self.skipped,
            "partial": self.partial,
            "passed": self.passed,
            "failures": self.failures,
            "notes": list(self.notes),
        }

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        extra = f", {self.skipped} skipped" if self.skipped else ""
        return f"{self.instance}/{self.axiom}: {status} ({self.cases_run} cases{extra}, {len(self.failures)} failures)"


@dataclass(eq=False)
class AdderInstance:
    name: str
    elem_kind: str
    unit_elem: Any
    fiber_of: Callable[[Any], FiberDescriptor]
    sum_op: Callable[[Any, Family], Any]
    flatten_op: Callable[[Any, Family, FlatPair], Any]
    equality: EqualityNotion
    elem_gen: Callable[[random.Random], Any]
    family_gen: Callable[[Any, random.Random], Family]
    commutative_flag: bool = True
    zero_elem: Any = None
    has_zero: bool = False
    # optional structure-aware hooks; None selects the pointwise default
    const_family_op: Callable | None = None
    boxtimes_op: Callable | None = None
    pullback_op: Callable | None = None
    bifamily_gen: Callable | None = None
    partial_sum_op: Callable | None = None
    transport_op: Callable | None = None
    point_equality: Callable | None = None
    family_equality: Callable | None = None
    fubini_counterexamples: Callable | None = None
    scale_family_op: Callable | None = None
    exhaustive_cases: Callable | None = None
    serializer: Callable | None = None
    description: str = ""

    @property
    def inner(self) -> "AdderInstance":
        return self

    @property
    def unit(self):
        return self.unit_elem

    # helpers used by the harness and by derived constructions
    def const_family(self, x, value) -> Family:
        if self.const_family_op is not None:
            return self.const_family_op(x, value)
        return Family(self.fiber_of(x), lambda _p, v=value: v, "closure", ("const", value))

    def pullback(self, x, f: Family, g: Family, i) -> Family:
        """The family j -> g(flatten(x, f, (i, j))) over fiber(f(i))."""
        if self.pullback_op is not None:
            return self.pullback_op(x, f, g, i)
        fi = f(i)
        return Family(self.inner.fiber_of(fi), lambda j: g(self.flatten_op(x, f, FlatPair(i, j))), "closure")

    def boxtimes(self, x, f: Family, g: Family) -> Family:
        if self.boxtimes_op is not None:
            return self.boxtimes_op(x, f, g)
        inner = self.inner

        def ev(i):
            return inner.sum_op(f(i), self.pullback(x, f, g, i))
        return Family(f.domain, ev, "closure")

    def transport(self, x, f, g):
        if self.transport_op is not None:
            return self.transport_op(x, f, g)
        return lambda p: p

    def points_equal(self, p, q) -> bool:
        if self.point_equality is not None:
            return self.point_equality(p, q)
        return self.equality.eq(p, q) if self.equality.kind == "epsilon" else p == q

    def families_equal(self, h: Family, f: Family, rng: random.Random):
        """Return None if equal on the check points, else (point, h(p), f(p))."""
        if self.family_equality is not None:
            return self.family_equality(h, f, rng)
        for p in f.domain.check_points(rng):
            a, b = h(p), f(p)
            if not self.equality.eq(a, b):
                return (p, a, b)
        return None

    def partial_sum(self, x, y, F: Family, over: str) -> Family:
        """Sum a family on pairs (j, i) in fiber(y) x fiber(x) over one axis."""
        if self.partial_sum_op is not None:
            return self.partial_sum_op(x, y, F, over)
        fx, fy = self.fiber_of(x), self.fiber_of(y)
        if over == "x":
            return Family(fy, lambda j: self.sum_op(x, Family(fx, lambda i: F((j, i)))))
        return Family(fx, lambda i: self.sum_op(y, Family(fy, lambda j: F((j, i)))))

    def serialize(self, obj):
        if self.serializer is not None:
            return self.serializer(obj)
        return default_serialize(obj)


@dataclass(eq=False)
class LeftModuleInstance:
    """Left module: sums of ``base``-valued families indexed by fibers of
    module elements."""
    name: str
    base: AdderInstance
    melem_gen: Callable[[random.Random], Any]
    mfiber_of: Callable[[Any], FiberDescriptor]
    lsum_op: Callable[[Any, Family], Any]
    lflatten_op: Callable[[Any, Family, FlatPair], Any]
    equality: EqualityNotion
    family_gen: Callable[[Any, random.Random], Family]
    const_family_op: Callable | None = None
    boxtimes_op: Callable | None = None
    pullback_op: Callable | None = None
    transport_op: Callable | None = None
    point_equality: Callable | None = None
    family_equality: Callable | None = None
    serializer: Callable | None = None
    description: str = ""

    # present the adder-shaped surface the harness uses
    @property
    def inner(self) -> AdderInstance:
        return self.base

    @property
    def unit(self):
        return self.base.unit_elem

    def elem_gen(self, rng):
        return self.melem_gen(rng)

    def fiber_of(self, m):
        return self.mfiber_of(m)

    def sum_op(self, m, f):
        return self.lsum_op(m, f)

    def flatten_op(self, m, f, pair):
        return self.lflatten_op(m, f, pair)

    const_family = AdderInstance.const_family
    pullback = AdderInstance.pullback
    boxtimes = AdderInstance.boxtimes
    transport = AdderInstance.transport
    points_equal = AdderInstance.points_equal
    serialize = AdderInstance.serialize

    def families_equal(self, h, f, rng):
        if self.family_equality is not None:
            return self.family_equality(h, f, rng)
        for p in f.domain.check_points(rng):
            a, b = h(p), f(p)
            if not self.base.equality.eq(a, b):
                return (p, a, b)
        return None


@dataclass(eq=False)
class RightModuleInstance:
    """Right module: sums of M-valued families indexed by fibers of the base."""
    name: str
    base: AdderInstance
    elem_kind: str
    msum_op: Callable[[Any, Family], Any]
    equality: EqualityNotion
    melem_gen: Callable[[random.Random], Any]
    mfamily_gen: Callable[[Any, random.Random], Family]
    const_mfamily_op: Callable | None = None
    mboxtimes_op: Callable | None = None
    map_family_op: Callable | None = None
    serializer: Callable | None = None
    description: str = ""

    def const_mfamily(self, x, m) -> Family:
        if self.const_mfamily_op is not None:
            return self.const_mfamily_op(x, m)
        return Family(self.base.fiber_of(x), lambda _p, v=m: v, "closure", ("const", m))

    def mboxtimes(self, x, f: Family, g: Family) -> Family:
        """(f (x) g)(i) = msum over fiber(f(i)) of j -> g(flatten(x, f, (i, j)))."""
        if self.mboxtimes_op is not None:
            return self.mboxtimes_op(x, f, g)
        base = self.base

        def ev(i):
            return self.msum_op(f(i), base.pullback(x, f, g, i))
        return Family(f.domain, ev, "closure")

    def map_family(self, f: Family, phi) -> Family:
        if self.map_family_op is not None:
            return self.map_family_op(f, phi)
        return Family(f.domain, lambda p: phi(f(p)), "closure")

    def serialize(self, obj):
        if self.serializer is not None:
            return self.serializer(obj)
        return default_serialize(obj)


# harness driver

def drive_cases(axiom: str, inst, cases: int, seed: int, case_fn, max_attempts: int | None = None) -> CheckResult:
    """Run ``case_fn(rng)`` until ``cases`` cases have run.

    ``case_fn`` returns None on success or a failure dict; raising Skip
    discards the attempt.  Per-case RNGs depend only on (seed, instance,
    axiom, attempt index).
    """
    res = CheckResult(axiom=axiom, instance=inst.name)
    attempts = max_attempts if max_attempts is not None else 4 * cases + 20
    idx = 0
    while res.cases_run < cases and idx < attempts:
        rng = case_rng(seed, inst.name, axiom, idx)
        try:
            out = case_fn(rng)
        except Skip:
            res.skipped += 1
            idx += 1
            continue
        res.cases_run += 1
        if out is not None:
            out = {"case": idx, "seed": seed, **out}
            res.failures.append(out)
        idx += 1
    if res.cases_run < cases:
        res.partial = True
        res.notes.append(f"generator exhausted after {idx} attempts; ran {res.cases_run} of {cases}")
    return res


def failure_record(inst, inputs: dict, lhs, rhs) -> dict:
    return {
        "inputs": {k: inst.serialize(v) for k, v in inputs.items()},
        "lhs": inst.serialize(lhs),
        "rhs": inst.serialize(rhs),
    }


def _exhaustive(axiom: str, inst, cases: int, case_fn) -> CheckResult:
    """Run ``case_fn`` over the instance's full input enumeration, cycling
    through it until at least ``cases`` cases have run."""
    res = CheckResult(axiom=axiom, instance=inst.name)
    inputs = list(inst.exhaustive_cases())
    rounds = 0
    while res.cases_run < cases and rounds < cases + 1:
        ran = 0
        for k, triple in enumerate(inputs):
            try:
                out = case_fn(*triple)
            except Skip:
                if rounds == 0:
                    res.skipped += 1
                continue
            ran += 1
            res.cases_run += 1
            if out is not None and rounds == 0:
                res.failures.append({"case": k, **out})
        rounds += 1
        if not ran:
            break
    res.notes.append(f"exhaustive: {len(inputs)} inputs, {rounds} passes")
    return res


def _gen_triple(inst, rng):
    x = inst.elem_gen(rng)
    f = inst.family_gen(x, rng)
    s = inst.sum_op(x, f)
    g = inst.family_gen(s, rng)
    return x, f, s, g


def right_unit_case(inst, x):
    s = inst.sum_op(x, inst.const_family(x, inst.unit))
    if not inst.equality.eq(s, x):
        return failure_record(inst, {"x": x}, s, x)
    return None


def left_unit_case(inst, x, f, rng):
    one = inst.const_family(x, inst.unit)
    h = inst.boxtimes(x, one, f)
    bad = inst.families_equal(h, f, rng)
    if bad is not None:
        p, a, b = bad
        return failure_record(inst, {"x": x, "f": f, "point": p}, a, b)
    return None


def sum_assoc_case(inst, x, f, g, s=None):
    if s is None:
        s = inst.sum_op(x, f)
    lhs = inst.sum_op(s, g)
    rhs = inst.sum_op(x, inst.boxtimes(x, f, g))
    if not inst.equality.eq(lhs, rhs):
        return failure_record(inst, {"x": x, "f": f, "g": g}, lhs, rhs)
    return None


def _sample_nested_point(inst, x, f, g, rng, tries: int = 8):
    fx = inst.fiber_of(x)
    for _ in range(tries):
        i = fx.sample(rng)
        fi = f(i)
        fib = inst.inner.fiber_of(fi)
        if fib.is_empty():
            continue
        j = fib.sample(rng)
        mid = inst.flatten_op(x, f, FlatPair(i, j))
        gk = inst.inner.fiber_of(g(mid))
        if gk.is_empty():
            continue
        return i, j, gk.sample(rng), mid
    raise Skip("no nonempty nested fiber found")


def flatten_assoc_case(inst, x, f, g, s, rng, sample_points: int):
    fg = inst.boxtimes(x, f, g)
    move = inst.transport(x, f, g)
    for _ in range(sample_points):
        try:
            i, j, k, mid = _sample_nested_point(inst, x, f, g, rng)
        except Skip:
            if _ == 0:
                raise
            break
        p1 = inst.flatten_op(s, g, FlatPair(mid, k))
        pull = inst.pullback(x, f, g, i)
        inner = inst.inner.flatten_op(f(i), pull, FlatPair(j, k))
        p2 = inst.flatten_op(x, fg, FlatPair(i, inner))
        q1 = move(p1)
        if not inst.points_equal(q1, p2):
            return failure_record(inst, {"x": x, "f": f, "g": g, "point": (i, j, k)}, q1, p2)
    return None


def check_right_unit(adder, cases: int = 200, seed: int = 0) -> CheckResult:
    if adder.fiber_of(adder.unit).kind == "finite" and len(adder.fiber_of(adder.unit).points) != 1:
        res = CheckResult("right_unit", adder.name)
        res.failures.append({"structural": "unit fiber is not a singleton"})
        return res
    if getattr(adder, "exhaustive_cases", None):
        return _exhaustive("right_unit", adder, cases, lambda x, f, g: right_unit_case(adder, x))
    return drive_cases("right_unit", adder, cases, seed, lambda rng: right_unit_case(adder, adder.elem_gen(rng)))


def check_left_unit(adder, cases: int = 200, seed: int = 0) -> CheckResult:
    unit_fiber = adder.inner.fiber_of(adder.unit)
    if unit_fiber.kind == "finite" and len(unit_fiber.points) != 1:
        res = CheckResult("left_unit", adder.name)
        res.failures.append({"structural": f"unit fiber has {len(unit_fiber.points)} points, expected 1"})
        return res
    if getattr(adder, "exhaustive_cases", None):
        return _exhaustive("left_unit", adder, cases,
                           lambda x, f, g: left_unit_case(adder, x, f, random.Random(seed)))

    def case(rng):
        x = adder.elem_gen(rng)
        return left_unit_case(adder, x, adder.family_gen(x, rng), rng)
    return drive_cases("left_unit", adder, cases, seed, case)


def check_sum_assoc(adder, cases: int = 200, seed: int = 0) -> CheckResult:
    if getattr(adder, "exhaustive_cases", None):
        return _exhaustive("sum_assoc", adder, cases, lambda x, f, g: sum_assoc_case(adder, x, f, g))

    def case(rng):
        x, f, s, g = _gen_triple(adder, rng)
        return sum_assoc_case(adder, x, f, g, s)
    return drive_cases("sum_assoc", adder, cases, seed, case)


def check_flatten_assoc(adder, cases: int = 200, sample_points: int = 4, seed: int = 0) -> CheckResult:
    if getattr(adder, "exhaustive_cases", None):
        rng = random.Random(seed)
        return _exhaustive("flatten_assoc", adder, cases, lambda x, f, g: flatten_assoc_case(
            adder, x, f, g, adder.sum_op(x, f), rng, sample_points))

    def case(rng):
        x, f, s, g = _gen_triple(adder, rng)
        return flatten_assoc_case(adder, x, f, g, s, rng, sample_points)
    return drive_cases("flatten_assoc", adder, cases, seed, case)


def fubini_case(adder, x, y, F):
    lhs = adder.sum_op(y, adder.partial_sum(x, y, F, "x"))
    rhs = adder.sum_op(x, adder.partial_sum(x, y, F, "y"))
    return lhs, rhs


def check_fubini(adder: AdderInstance, cases: int = 200, seed: int = 0) -> CheckResult:
    """Commutative instances: both iterated sums agree on generated cases.
    Non-commutative ones: some curated case must tell the orders apart."""
    if not adder.commutative_flag:
        res = CheckResult("fubini", adder.name)
        examples = adder.fubini_counterexamples() if adder.fubini_counterexamples else []
        for x, y, F in examples:
            res.cases_run += 1
            lhs, rhs = fubini_case(adder, x, y, F)
            if not adder.equality.eq(lhs, rhs):
                res.notes.append(
                    f"counterexample: x={adder.serialize(x)}, y={adder.serialize(y)}, "
                    f"sum_y sum_x = {adder.serialize(lhs)}, sum_x sum_y = {adder.serialize(rhs)}")
                return res
        res.failures.append({"expected": "a Fubini counterexample for a non-commutative instance",
                             "searched": res.cases_run})
        return res
    if adder.bifamily_gen is None:
        res = CheckResult("fubini", adder.name)
        res.notes.append("no bivariate family generator; skipped")
        return res

    def case(rng):
        x = adder.elem_gen(rng)
        y = adder.elem_gen(rng)
        F = adder.bifamily_gen(x, y, rng)
        lhs, rhs = fubini_case(adder, x, y, F)
        if not adder.equality.eq(lhs, rhs):
            return failure_record(adder, {"x": x, "y": y, "f": F}, lhs, rhs)
        return None
    return drive_cases("fubini", adder, cases, seed, case)


def check_zero(adder: AdderInstance, cases: int = 200, seed: int = 0) -> CheckResult:
    if not adder.has_zero:
        res = CheckResult("zero", adder.name)
        res.notes.append("no zero object; skipped")
        return res
    zero = adder.zero_elem

    def case(rng):
        x = adder.elem_gen(rng)
        s = adder.sum_op(x, adder.const_family(x, zero))
        if not adder.equality.eq(s, zero):
            return failure_record(adder, {"x": x, "clause": 1}, s, zero)
        f = adder.family_gen(zero, rng)
        s0 = adder.sum_op(zero, f)
        if not adder.equality.eq(s0, zero):
            return failure_record(adder, {"f": f, "clause": 2}, s0, zero)
        return None
    return drive_cases("zero", adder, cases, seed, case)


def check_naturality(adder: AdderInstance, reindex: dict | None = None, cases: int = 200,
                     seed: int = 0) -> CheckResult:
    """(sum^y g) o r == sum^{y o r} (g o (r x id)) for r: U -> U' between finite
    parameter sets.  Elements over U' are tuples of pointwise elements."""

    def case(rng):
        if reindex is None:
            n_src, n_tgt = rng.randint(1, 4), rng.randint(1, 4)
            r = {u: rng.randrange(n_tgt) for u in range(n_src)}
            targets = range(n_tgt)
        else:
            r = dict(reindex)
            targets = sorted(set(r.values()), key=repr)
        y = {v: adder.elem_gen(rng) for v in targets}
        g = {v: adder.family_gen(y[v], rng) for v in targets}
        summed = {v: adder.sum_op(y[v], g[v]) for v in targets}
        for u, v in r.items():
            lhs = summed[v]
            xu = y[v]
            # the pulled-back family at u lives over fiber(x(u)) = fiber(y(r(u)))
            fu = g[v].with_domain(adder.fiber_of(xu))
            rhs = adder.sum_op(xu, fu)
            if not adder.equality.eq(lhs, rhs):
                return failure_record(adder, {"u": u, "r(u)": v, "y": y[v], "g": g[v]}, lhs, rhs)
        return None
    return drive_cases("naturality", adder, cases, seed, case)


def check_boxtimes_assoc(adder: AdderInstance, cases: int = 200, seed: int = 0) -> CheckResult:
    """f (x) (g (x) h) == (f (x) g) (x) h as families over fiber(x)."""

    def case(rng):
        x = adder.elem_gen(rng)
        f = adder.family_gen(x, rng)
        s = adder.sum_op(x, f)
        g = adder.family_gen(s, rng)
        t = adder.sum_op(s, g)
        h = adder.family_gen(t, rng)
        left = adder.boxtimes(x, f, adder.boxtimes(s, g, h))
        right = adder.boxtimes(x, adder.boxtimes(x, f, g), h)
        bad = adder.families_equal(left, right, rng)
        if bad is not None:
            p, a, b = bad
            return failure_record(adder, {"x": x, "f": f, "g": g, "h": h, "point": p}, a, b)
        return None
    return drive_cases("boxtimes_assoc", adder, cases, seed, case)


def check_right_module(mod: RightModuleInstance, cases: int = 200, seed: int = 0) -> CheckResult:
    base = mod.base
    res = CheckResult("module", mod.name)

    def unit_case(rng):
        m = mod.melem_gen(rng)
        s = mod.msum_op(base.unit_elem, mod.const_mfamily(base.unit_elem, m))
        if not mod.equality.eq(s, m):
            return failure_record(mod, {"m": m}, s, m)
        return None

    def assoc_case(rng):
        x = base.elem_gen(rng)
        f = base.family_gen(x, rng)
        s = base.sum_op(x, f)
        g = mod.mfamily_gen(s, rng)
        lhs = mod.msum_op(s, g)
        rhs = mod.msum_op(x, mod.mboxtimes(x, f, g))
        if not mod.equality.eq(lhs, rhs):
            return failure_record(mod, {"x": x, "f": f, "g": g}, lhs, rhs)
        return None

    u = drive_cases("module_unit", mod, cases, seed, unit_case)
    a = drive_cases("module_sum_assoc", mod, cases, seed, assoc_case)
    for part in (u, a):
        for fail in part.failures:
            fail["clause"] = part.axiom
    res.merge(u).merge(a)
    return res


def check_left_module(mod: LeftModuleInstance, cases: int = 200, seed: int = 0,
                      sample_points: int = 3) -> CheckResult:
    res = CheckResult("module", mod.name)

    def unit_case(rng):
        return right_unit_case(mod, mod.melem_gen(rng))

    def assoc_case(rng):
        m, f, s, g = _gen_triple(mod, rng)
        return sum_assoc_case(mod, m, f, g, s)

    def flat_case(rng):
        m, f, s, g = _gen_triple(mod, rng)
        return flatten_assoc_case(mod, m, f, g, s, rng, sample_points)

    parts = [
        drive_cases("module_unit", mod, cases, seed, unit_case),
        drive_cases("module_sum_assoc", mod, cases, seed, assoc_case),
        drive_cases("module_flatten_assoc", mod, cases, seed, flat_case),
    ]
    for part in parts:
        for fail in part.failures:
            fail["clause"] = part.axiom
        res.merge(part)
    return res


def check_linear_map(phi, m: RightModuleInstance, n: RightModuleInstance, cases: int = 200,
                     seed: int = 0) -> CheckResult:
    """phi(sum^x f) == sum^x (phi o f)."""
    if m.base is not n.base:
        raise ValueError("modules must share the base adder")
    base = m.base

    def case(rng):
        x = base.elem_gen(rng)
        f = m.mfamily_gen(x, rng)
        lhs = phi(m.msum_op(x, f))
        rhs = n.msum_op(x, n.map_family(f, phi))
        if not n.equality.eq(lhs, rhs):
            return failure_record(n, {"x": x, "f": f}, lhs, rhs)
        return None
    res = drive_cases("linear_map", m, cases, seed, case)
    res.instance = f"{m.name}->{n.name}"
    return res
