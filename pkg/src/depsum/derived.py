"""Structure every adder inherits: boxtimes composition, the binary product,
the category of fibrations, and the bridge from finite-set maps to
fibrations of the naturals."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Any, Sequence

from .core import AdderInstance, CheckResult, Family, drive_cases, failure_record
from .discrete import as_table, make_nat_adder, nat_boxtimes, table_family


def boxtimes(adder: AdderInstance, x, f: Family, g: Family) -> Family:
    """f (x) g: the family i -> sum over fiber(f(i)) of j -> g(flatten(x, f, (i, j)))."""
    return adder.boxtimes(x, f, g)


def product(adder: AdderInstance, x, y):
    """x . y: the sum over y of the constant family at x."""
    return adder.sum_op(y, adder.const_family(y, x))


def scaled_family(adder: AdderInstance, y, f: Family) -> Family:
    """The family i -> y . f(i)."""
    if adder.scale_family_op is not None:
        return adder.scale_family_op(y, f)
    return Family(f.domain, lambda i: product(adder, y, f(i)), "closure")


def check_monoid_laws(adder: AdderInstance, cases: int = 200, seed: int = 0) -> CheckResult:
    """Unit laws and associativity of the product; commutativity when the
    instance claims Fubini, otherwise a commuting failure is searched for."""
    eq = adder.equality.eq
    one = adder.unit_elem
    witnesses = []

    def case(rng):
        x, y, z = (adder.elem_gen(rng) for _ in range(3))
        checks = [
            ("left_unit", product(adder, one, x), x),
            ("right_unit", product(adder, x, one), x),
            ("assoc", product(adder, x, product(adder, y, z)), product(adder, product(adder, x, y), z)),
        ]
        xy, yx = product(adder, x, y), product(adder, y, x)
        if adder.commutative_flag:
            checks.append(("commutative", xy, yx))
        elif not eq(xy, yx) and not witnesses:
            witnesses.append((x, y, xy, yx))
        for law, lhs, rhs in checks:
            if not eq(lhs, rhs):
                return failure_record(adder, {"law": law, "x": x, "y": y, "z": z}, lhs, rhs)
        return None

    res = drive_cases("monoid_laws", adder, cases, seed, case)
    if not adder.commutative_flag:
        if witnesses:
            x, y, xy, yx = witnesses[0]
            s = adder.serialize
            res.notes.append(f"non-commutative: {s(x)}.{s(y)} = {s(xy)} but {s(y)}.{s(x)} = {s(yx)}")
        else:
            res.notes.append("no commutativity failure found among generated pairs")
    return res


def check_right_distributivity(adder: AdderInstance, cases: int = 200, seed: int = 0) -> CheckResult:
    """y . (sum^x f) == sum^x (y . f)."""

    def case(rng):
        x = adder.elem_gen(rng)
        f = adder.family_gen(x, rng)
        y = adder.elem_gen(rng)
        lhs = product(adder, y, adder.sum_op(x, f))
        rhs = adder.sum_op(x, scaled_family(adder, y, f))
        if not adder.equality.eq(lhs, rhs):
            return failure_record(adder, {"x": x, "f": f, "y": y}, lhs, rhs)
        return None
    return drive_cases("right_distributivity", adder, cases, seed, case)


# fibrations

@dataclass(frozen=True, eq=False)
class Fibration:
    """A morphism x -> y: a family over fiber(y) whose sum is x."""
    adder: AdderInstance
    codomain: Any
    family: Family
    domain: Any

    @classmethod
    def of(cls, adder: AdderInstance, y, f: Family) -> "Fibration":
        return cls(adder, y, f, adder.sum_op(y, f))

    def validate(self) -> None:
        recomputed = self.adder.sum_op(self.codomain, self.family)
        if not self.adder.equality.eq(recomputed, self.domain):
            raise ValueError("stored domain differs from the sum of the family")


def fib_identity(adder: AdderInstance, x) -> Fibration:
    return Fibration.of(adder, x, adder.const_family(x, adder.unit_elem))


def fib_compose(adder: AdderInstance, f: Fibration, g: Fibration) -> Fibration:
    """f o g := f (x) g for f: y -> z and g: x -> y."""
    if not adder.equality.eq(f.domain, g.codomain):
        raise ValueError(f"cannot compose: domain {adder.serialize(f.domain)} "
                         f"!= codomain {adder.serialize(g.codomain)}")
    return Fibration(adder, f.codomain, adder.boxtimes(f.codomain, f.family, g.family), g.domain)


def fibrations_equal(a: Fibration, b: Fibration, rng: random.Random | None = None) -> bool:
    adder = a.adder
    if not (adder.equality.eq(a.codomain, b.codomain) and adder.equality.eq(a.domain, b.domain)):
        return False
    return adder.families_equal(a.family, b.family, rng or random.Random(0)) is None


def check_fib_category(adder: AdderInstance, cases: int = 200, seed: int = 0) -> CheckResult:
    """Identity and associativity laws of Fib(A)(*) on generated chains
    w -> x -> y -> z."""

    def case(rng):
        z = adder.elem_gen(rng)
        f = Fibration.of(adder, z, adder.family_gen(z, rng))
        g = Fibration.of(adder, f.domain, adder.family_gen(f.domain, rng))
        h = Fibration.of(adder, g.domain, adder.family_gen(g.domain, rng))
        checks = [
            ("left_identity", fib_compose(adder, fib_identity(adder, z), f), f),
            ("right_identity", fib_compose(adder, f, fib_identity(adder, f.domain)), f),
            ("assoc", fib_compose(adder, fib_compose(adder, f, g), h),
             fib_compose(adder, f, fib_compose(adder, g, h))),
        ]
        for law, lhs, rhs in checks:
            if not fibrations_equal(lhs, rhs, rng):
                return failure_record(adder, {"law": law, "z": z, "f": f.family, "g": g.family, "h": h.family},
                             lhs.family, rhs.family)
        return None
    return drive_cases("fib_category", adder, cases, seed, case)


def fib_hom(adder: AdderInstance, x, y, families: Sequence[Family]) -> list:
    """Morphisms x -> y among the given candidate families over fiber(y)."""
    return [Fibration(adder, y, f, x) for f in families if adder.equality.eq(adder.sum_op(y, f), x)]


def enumerate_fib_category(adder: AdderInstance, objects: Sequence, families_over) -> dict:
    """Objects, morphisms and composition table of Fib(A)(*) restricted to
    ``objects``; ``families_over(y)`` lists every family over fiber(y)."""
    homs = {}
    for x in objects:
        for y in objects:
            homs[(x, y)] = fib_hom(adder, x, y, families_over(y))
    morphisms = []
    for (x, y), fs in homs.items():
        for fib in fs:
            morphisms.append({"id": len(morphisms), "src": x, "tgt": y,
                              "family": list(as_table(fib.family)), "_fib": fib})

    def find(fib):
        for m in morphisms:
            if m["src"] == fib.domain and m["tgt"] == fib.codomain and fibrations_equal(m["_fib"], fib):
                return m["id"]
        raise ValueError("composite not among enumerated morphisms")

    compose = {}
    for a in morphisms:
        for b in morphisms:
            if b["tgt"] == a["src"]:
                compose[(a["id"], b["id"])] = find(fib_compose(adder, a["_fib"], b["_fib"]))
    identities = {x: find(fib_identity(adder, x)) for x in objects}
    for m in morphisms:
        del m["_fib"]
    return {"objects": list(objects), "morphisms": morphisms,
            "compose": [[a, b, c] for (a, b), c in sorted(compose.items())],
            "identities": [identities[x] for x in objects]}


# finite sets and fibrations of the naturals

def _check_map(f: Sequence[int], m: int) -> tuple:
    f = tuple(f)
    if any(not (isinstance(v, int) and 1 <= v <= m) for v in f):
        raise ValueError(f"{f!r} is not a map into [{m}]")
    return f


def phi_finset(f: Sequence[int], m: int, nat: AdderInstance | None = None) -> Fibration:
    """A map [n] -> [m] (as the tuple of its values) becomes the fibration
    n -> m whose family counts the points of each fiber."""
    f = _check_map(f, m)
    nat = nat if nat is not None else _NAT
    counts = [0] * m
    for v in f:
        counts[v - 1] += 1
    return Fibration(nat, m, table_family(counts), len(f))


def compose_maps(g: Sequence[int], f: Sequence[int]) -> tuple:
    """g o f for maps given as value tuples."""
    return tuple(g[v - 1] for v in f)


def all_maps(n: int, m: int):
    return itertools.product(range(1, m + 1), repeat=n)


def monotone_maps(n: int, m: int):
    return itertools.combinations_with_replacement(range(1, m + 1), n)


def phi_composition_sides(g: Sequence[int], f: Sequence[int], m: int, k: int):
    """(Phi(g o f), Phi(g) (x) Phi(f)) as tables over [k]."""
    lhs = as_table(phi_finset(compose_maps(g, f), k).family)
    rhs = nat_boxtimes(k, phi_finset(g, k).family, phi_finset(f, m).family)
    return lhs, rhs


def check_phi_functorial(max_size: int = 6, cases: int | None = None, seed: int = 0,
                         monotone_only: bool = False, exhaustive_up_to: int = 3) -> CheckResult:
    """Phi(g o f) == Phi(g) (x) Phi(f) for composable f: [n] -> [m], g: [m] -> [k].

    Pairs with every size <= ``exhaustive_up_to`` are enumerated; larger sizes
    up to ``max_size`` are sampled (``cases`` pairs, default 2000)."""
    label = "phi_functorial_monotone" if monotone_only else "phi_functorial"
    res = CheckResult(label, "nat")
    maps = monotone_maps if monotone_only else all_maps

    def run(f, g, m, k):
        res.cases_run += 1
        lhs, rhs = phi_composition_sides(g, f, m, k)
        if lhs != rhs:
            res.failures.append({"inputs": {"f": list(f), "g": list(g), "m": m, "k": k},
                                 "lhs": list(lhs), "rhs": list(rhs)})

    small = range(0, exhaustive_up_to + 1)
    for n, m, k in itertools.product(small, repeat=3):
        for f in maps(n, m):
            for g in maps(m, k):
                run(f, g, m, k)
    rng = random.Random(seed)
    for _ in range(cases if cases is not None else 2000):
        n, m, k = (rng.randint(0, max_size) for _ in range(3))
        if m == 0 and n > 0 or k == 0 and m > 0:
            continue
        if monotone_only:
            f = tuple(sorted(rng.randint(1, m) for _ in range(n)))
            g = tuple(sorted(rng.randint(1, k) for _ in range(m)))
        else:
            f = tuple(rng.randint(1, m) for _ in range(n))
            g = tuple(rng.randint(1, k) for _ in range(m))
        run(f, g, m, k)
    if res.failures:
        first = res.failures[0]
        res.notes.append(f"{len(res.failures)} of {res.cases_run} pairs differ; first: "
                         f"f={first['inputs']['f']}, g={first['inputs']['g']}")
    return res


def phi_hom_counts(n: int, m: int) -> dict:
    """Sizes of Hom([n],[m]), of Hom(n, m) in Fib(N)(*), of the image of
    Phi, and of the image restricted to monotone maps."""
    fib_hom_size = sum(1 for t in itertools.product(range(n + 1), repeat=m) if sum(t) == n)
    image = {as_table(phi_finset(f, m).family) for f in all_maps(n, m)}
    mono_image = {as_table(phi_finset(f, m).family) for f in monotone_maps(n, m)}
    return {"finset": m ** n, "monotone": sum(1 for _ in monotone_maps(n, m)),
            "fib": fib_hom_size, "image": len(image), "monotone_image": len(mono_image)}


def check_boxtimes_assoc_nat_exhaustive(max_len: int = 3, max_entry: int = 3) -> CheckResult:
    """f (x) (g (x) h) == (f (x) g) (x) h for every triple of tables with
    entries <= max_entry whose lengths (x, sum f, sum g) are all <= max_len;
    h ranges over all tables on sum g."""
    res = CheckResult("boxtimes_assoc_exhaustive", "nat")

    def tables(length):
        return itertools.product(range(max_entry + 1), repeat=length)

    for x in range(max_len + 1):
        for f in tables(x):
            s = sum(f)
            if s > max_len:
                continue
            for g in tables(s):
                t = sum(g)
                if t > max_len:
                    continue
                fg = nat_boxtimes(x, f, g)
                for h in tables(t):
                    res.cases_run += 1
                    left = nat_boxtimes(x, f, nat_boxtimes(s, g, h))
                    right = nat_boxtimes(x, fg, h)
                    if left != right:
                        res.failures.append({"inputs": {"f": f, "g": g, "h": h},
                                             "lhs": list(left), "rhs": list(right)})
    return res


_NAT = make_nat_adder()


__all__ = [
    "boxtimes",
    "product",
    "scaled_family",
    "check_monoid_laws",
    "check_right_distributivity",
    "Fibration",
    "fib_identity",
    "fib_compose",
    "fibrations_equal",
    "check_fib_category",
    "fib_hom",
    "enumerate_fib_category",
    "phi_finset",
    "compose_maps",
    "all_maps",
    "monotone_maps",
    "phi_composition_sides",
    "check_phi_functorial",
    "phi_hom_counts",
    "check_boxtimes_assoc_nat_exhaustive",
]
