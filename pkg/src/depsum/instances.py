"""Named instances and the suites that apply to each.

Every entry builds a fresh instance on demand.  ``run_suite`` runs one
named suite and stamps the result with the registry name, so reports do not
depend on how an instance names itself internally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .core import (
    AXIOMS,
    CheckResult,
    check_boxtimes_assoc,
    check_fubini,
    check_left_module,
    check_linear_map,
    check_naturality,
    check_right_module,
    check_right_unit,
    check_left_unit,
    check_sum_assoc,
    check_flatten_assoc,
    check_zero,
    case_rng,
)

ADDER_SUITES = AXIOMS + ("boxtimes_assoc",)

_ADDER_CHECKS = {
    "right_unit": check_right_unit,
    "left_unit": check_left_unit,
    "sum_assoc": check_sum_assoc,
    "flatten_assoc": check_flatten_assoc,
    "fubini": check_fubini,
    "zero": check_zero,
    "naturality": check_naturality,
    "boxtimes_assoc": check_boxtimes_assoc,
}


@dataclass(frozen=True)
class Entry:
    name: str
    kind: str                      # "adder", "left-module" or "right-module"
    factory: Callable[..., Any]    # called as factory(tol) when uses_tol, else factory()
    uses_tol: bool = False
    extras: dict = field(default_factory=dict)   # suite name -> fn(inst, cases, seed)
    note: str = ""

    def build(self, tol: float | None = None):
        if self.uses_tol and tol is not None:
            return self.factory(tol)
        return self.factory()

    @property
    def suites(self) -> tuple:
        base = ADDER_SUITES if self.kind == "adder" else ("module",)
        return base + tuple(self.extras)


# factories

def _nat():
    from .discrete import make_nat_adder
    return make_nat_adder()


def _card():
    from .discrete import make_nat_adder
    return make_nat_adder(name="card")


def _int():
    from .discrete import make_int_adder
    return make_int_adder()


def _f1():
    from .discrete import make_f1_adder
    return make_f1_adder()


def _monoid():
    from .discrete import make_monoid_adder
    return make_monoid_adder()


def _ord():
    from .ordinal import make_ord_adder
    return make_ord_adder()


def _padic(q):
    def build():
        from .padic import make_padic_adder
        return make_padic_adder(q)
    return build


def _faulhaber():
    from .polyadder import make_faulhaber_adder
    return make_faulhaber_adder()


def _real(kind):
    def build(tol=None):
        from .continuous import DEFAULT_TOL, make_real_adder
        return make_real_adder(kind, tol=DEFAULT_TOL if tol is None else tol)
    return build


def _cpoly(tol=None):
    from .continuous import make_complex_adder
    return make_complex_adder() if tol is None else make_complex_adder(tol)


def _cat():
    from .fincat import make_cat_adder
    return make_cat_adder()


def _interval(tol=None):
    from .continuous import DEFAULT_TOL, make_interval_module
    return make_interval_module(2.0, tol=DEFAULT_TOL if tol is None else tol)


def _topset():
    from .fintop import make_top_module
    return make_top_module()


def sample_monoid():
    """A fixed non-commutative monoid: self-maps of {0, 1, 2} generated by a
    transposition and a collapse."""
    from .discrete import transformation_monoid
    return transformation_monoid([(1, 0, 2), (0, 0, 2)], 3)


def _nat_monoid():
    from .discrete import nat_module_from_monoid
    return nat_module_from_monoid(sample_monoid())


def _f1_pointed():
    from .discrete import f1_pointed_module
    return f1_pointed_module()


def _vector(tol=None):
    from .continuous import DEFAULT_TOL, make_vector_module
    return make_vector_module(2, tol=DEFAULT_TOL if tol is None else tol)


def _cat_finset():
    from .fincat import make_cat_set_module
    return make_cat_set_module()


# extra suites

def _closure(inst, cases, seed):
    from .continuous import check_closure
    return check_closure(inst, cases, seed)


def _interval_closure(inst, cases, seed):
    from .continuous import check_interval_closure
    return check_interval_closure(inst, 2.0, cases, seed)


def _limit_oracle(q):
    def run(inst, cases, seed):
        from .padic import check_limit_oracle
        return check_limit_oracle(q, cases, seed)
    return run


def _faulhaber_identities(inst, cases, seed):
    from .polyadder import faulhaber_axiom_identities
    return faulhaber_axiom_identities(cases, seed)


def _faulhaber_parameters(inst, cases, seed):
    from .polyadder import check_parameter_naturality
    return check_parameter_naturality(cases, seed)


def _ord_recursion(inst, cases, seed):
    """Sums over finite ordinals against the step-by-step recursion."""
    from .core import drive_cases, failure_record
    from .ordinal import cnf_cmp, nat, ord_sum, ord_sum_recursion, random_step_family

    def case(rng):
        n = rng.randint(0, 12)
        f = random_step_family(rng, nat(n))
        a, b = ord_sum(nat(n), f), ord_sum_recursion(n, f)
        if cnf_cmp(a, b) != 0:
            return failure_record(inst, {"x": n, "f": f}, a, b)
        return None
    return drive_cases("finite_recursion", inst, cases, seed, case)


def _monoid_laws(inst, cases, seed):
    from .derived import check_monoid_laws
    return check_monoid_laws(inst, cases, seed)


def _cat_cardinality(inst, cases, seed):
    from .fincat import check_cardinality_oracle
    return check_cardinality_oracle(cases, seed)


def _cat_reassociation(inst, cases, seed):
    from .fincat import check_reassociation
    return check_reassociation(cases, seed)


def _cat_flatten_functors(inst, cases, seed):
    from .fincat import check_flatten_functors
    return check_flatten_functors(cases, seed)


def _cat_unit_colimits(inst, cases, seed):
    from .fincat import check_unit_colimits
    return check_unit_colimits()


def _monoid_round_trip(inst, cases, seed):
    """Module -> monoid -> module is the identity on sampled finite monoids."""
    from .core import drive_cases, failure_record
    from .discrete import monoid_from_nat_module, nat_module_from_monoid, random_finite_monoid

    def case(rng):
        mon = random_finite_monoid(rng)
        back = monoid_from_nat_module(nat_module_from_monoid(mon), mon.elements)
        if back != mon:
            return failure_record(inst, {"monoid": mon.elements}, back.table, mon.table)
        return None
    return drive_cases("monoid_round_trip", inst, cases, seed, case)


def _matrix_linearity(inst, cases, seed):
    import numpy as np
    from .continuous import MatrixMap, make_vector_module
    rng = case_rng(seed, "matrix")
    T = MatrixMap(np.array([[rng.uniform(-2, 2) for _ in range(2)] for _ in range(3)]))
    target = make_vector_module(3, base=inst.base, tol=inst.equality.tol)
    return check_linear_map(T, inst, target, cases, seed)


def _cat_nested(inst, cases, seed):
    from .fincat import cat_module_suite
    return cat_module_suite(cases, seed)


def _cat_linear(inst, cases, seed):
    from .fincat import cat_linear_check, identity_set_functor, product_set_functor
    res = CheckResult("linear_functors", inst.name)
    for phi in (identity_set_functor(), product_set_functor(2)):
        res.merge(cat_linear_check(phi, cases, seed))
    return res


def _top_etale_unit(inst, cases, seed):
    from .fintop import check_unit_etale
    return check_unit_etale()


def _top_phi(inst, cases, seed):
    from .fintop import check_phi_homeomorphism
    return check_phi_homeomorphism(cases, seed)


def _top_eps(inst, cases, seed):
    from .fintop import check_eps_monotone
    return check_eps_monotone(cases, seed)


def _padic_entry(q: int) -> Entry:
    return Entry(f"zq{q}", "adder", _padic(q), extras={"limit_oracle": _limit_oracle(q)})


_ENTRIES = [
    Entry("nat", "adder", _nat, extras={"monoid_laws": _monoid_laws}),
    Entry("card", "adder", _card, note="alias of nat at finite scale"),
    Entry("int", "adder", _int),
    Entry("f1", "adder", _f1),
    Entry("monoid", "adder", _monoid),
    Entry("ord", "adder", _ord, extras={"finite_recursion": _ord_recursion}),
    _padic_entry(2),
    _padic_entry(3),
    _padic_entry(5),
    Entry("faulhaber", "adder", _faulhaber,
          extras={"exact_identities": _faulhaber_identities, "parameter_naturality": _faulhaber_parameters}),
    Entry("rpos", "adder", _real("rpos"), uses_tol=True, extras={"closure": _closure}),
    Entry("unit", "adder", _real("unit"), uses_tol=True, extras={"closure": _closure}),
    Entry("real", "adder", _real("real"), uses_tol=True, extras={"closure": _closure}),
    Entry("sym", "adder", _real("sym"), uses_tol=True, extras={"closure": _closure}),
    Entry("cpoly", "adder", _cpoly, uses_tol=True),
    Entry("cat", "adder", _cat,
          extras={"unit_colimit": _cat_unit_colimits, "reassociation": _cat_reassociation,
                  "flatten_functors": _cat_flatten_functors, "cardinality_oracle": _cat_cardinality}),
    Entry("interval_n", "left-module", _interval, uses_tol=True, extras={"closure": _interval_closure}),
    Entry("topset", "left-module", _topset,
          extras={"etale_unit": _top_etale_unit, "phi_homeomorphism": _top_phi, "eps_monotone": _top_eps}),
    Entry("nat-monoid", "right-module", _nat_monoid, extras={"monoid_round_trip": _monoid_round_trip}),
    Entry("f1-pointed", "right-module", _f1_pointed),
    Entry("real-vector2", "right-module", _vector, uses_tol=True, extras={"matrix_linearity": _matrix_linearity}),
    Entry("cat-finset", "right-module", _cat_finset,
          extras={"nested_colimits": _cat_nested, "linear_functors": _cat_linear}),
]

REGISTRY: dict[str, Entry] = {e.name: e for e in _ENTRIES}


def names() -> list[str]:
    return sorted(REGISTRY)


def get(name: str) -> Entry:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown instance {name!r}; known: {', '.join(names())}") from None


def run_suite(name: str, suite: str, cases: int = 200, seed: int = 0, tol: float | None = None,
              inst=None) -> CheckResult:
    """Run one suite on one registry instance."""
    entry = get(name)
    if suite not in entry.suites:
        raise KeyError(f"suite {suite!r} does not apply to {name}; available: {', '.join(entry.suites)}")
    inst = inst if inst is not None else entry.build(tol)
    if suite in entry.extras:
        res = entry.extras[suite](inst, cases, seed)
    elif entry.kind == "adder":
        res = _ADDER_CHECKS[suite](inst, cases=cases, seed=seed)
    elif entry.kind == "left-module":
        res = check_left_module(inst, cases=cases, seed=seed)
    else:
        res = check_right_module(inst, cases=cases, seed=seed)
    res.instance = name
    res.axiom = suite
    return res


def describe(name: str) -> dict:
    """Static facts for listings: kind, commutativity, zero object, suites."""
    entry = get(name)
    inst = entry.build()
    adder = inst if entry.kind == "adder" else inst.base
    return {
        "name": name,
        "kind": entry.kind,
        "base": None if entry.kind == "adder" else adder.name,
        "commutative": bool(adder.commutative_flag) if entry.kind == "adder" else None,
        "zero": bool(adder.has_zero) if entry.kind == "adder" else None,
        "suites": list(entry.suites),
        "description": getattr(inst, "description", "") or entry.note,
    }


__all__ = ["ADDER_SUITES", "Entry", "REGISTRY", "names", "get", "run_suite", "describe", "sample_monoid"]
