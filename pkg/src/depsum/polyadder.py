"""The Faulhaber adder on the affine line over Q.

Elements are rationals or polynomials in a parameter U (generalized
elements).  A family is a polynomial p in the index X whose coefficients
may involve U; its sum over x is Sigma(p)(x), where Sigma replaces X^k by the
Faulhaber polynomial F_k.  Flattening is p_flat = Y + Sigma(p)(X - 1).
"""
from __future__ import annotations

import random
from fractions import Fraction

from .arith import (
    PolyError,
    RationalPoly,
    poly_identity_check_by_points,
    poly_substitute,
    sum_operator,
)
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

NV = 4
X, Y, Z, U = 0, 1, 2, 3
FAMILY_DEGREE_CAP = 10
_VX = RationalPoly.var(X, NV)
_VY = RationalPoly.var(Y, NV)
_VZ = RationalPoly.var(Z, NV)
_VU = RationalPoly.var(U, NV)


def felem(v) -> RationalPoly:
    """Coerce a rational or a polynomial in U to an element."""
    if isinstance(v, RationalPoly):
        p = v.lift(NV) if v.nvars < NV else v
        if p.variables() - {U}:
            raise PolyError("elements may only involve the parameter U")
        return p
    return RationalPoly.const(Fraction(v), NV)


def ffamily(p) -> RationalPoly:
    """Coerce a polynomial in X (coefficients in Q[U]) to a family."""
    if not isinstance(p, RationalPoly):
        return RationalPoly.const(Fraction(p), NV)
    p = p.lift(NV) if p.nvars < NV else p
    if p.variables() - {X, U}:
        raise PolyError("families are polynomials in X with coefficients in Q[U]")
    if p.degree(X) > FAMILY_DEGREE_CAP:
        raise PolyError(f"family degree {p.degree(X)} exceeds {FAMILY_DEGREE_CAP}")
    return p


def faulhaber_sum(x, p) -> RationalPoly:
    """Sum^x p = Sigma(p) evaluated at x."""
    x, p = felem(x), _lift(p)
    return poly_substitute(sum_operator(p, var=X), {X: x})


def faulhaber_sum_at(x, p) -> Fraction:
    """Same as faulhaber_sum for a rational x and a parameter-free p."""
    s = faulhaber_sum(x, p)
    if not s.is_constant():
        raise PolyError("result depends on the parameter")
    return s.constant_value()


def faulhaber_flatten(p) -> RationalPoly:
    """p_flat = Y + Sigma(p)(X - 1), a polynomial in X and Y."""
    p = _lift(p)
    return _VY + poly_substitute(sum_operator(p, var=X), {X: _VX - 1})


def flatten_eval(p, i, j) -> RationalPoly:
    return poly_substitute(faulhaber_flatten(p), {X: felem(i), Y: felem(j)})


def faulhaber_boxtimes(f, g) -> RationalPoly:
    """(f (x) g)(X) = Sigma_Y^{f(X)} g(Y + Sigma(f)(X - 1))."""
    f, g = _lift(f), _lift(g)
    shift = poly_substitute(sum_operator(f, var=X), {X: _VX - 1})
    inner = poly_substitute(g, {X: _VY + shift})
    return poly_substitute(sum_operator(inner, var=Y), {Y: f})


def faulhaber_pullback(f, g, i) -> RationalPoly:
    """j -> g(j + Sigma^{i-1} f), as a polynomial in X standing for j."""
    c = faulhaber_sum(felem(i) - 1, f)
    return poly_substitute(_lift(g), {X: _VX + c})


def _lift(v) -> RationalPoly:
    if isinstance(v, RationalPoly):
        return v.lift(NV) if v.nvars < NV else v
    return RationalPoly.const(Fraction(v), NV)


def shift_law_sides(p, x, y):
    """(Sum^{x+y} p, Sum^x p + Sum^y p(T + x))."""
    x, y = _lift(x), _lift(y)
    lhs = poly_substitute(sum_operator(p, var=X), {X: x + y})
    shifted = poly_substitute(p, {X: _VX + x})
    rhs = poly_substitute(sum_operator(p, var=X), {X: x}) + poly_substitute(sum_operator(shifted, var=X), {X: y})
    return lhs, rhs


def random_family_poly(rng: random.Random, max_degree: int = 5, param: bool = True) -> RationalPoly:
    deg = rng.randint(0, max_degree)
    terms = {}
    for k in range(deg + 1):
        if rng.random() < 0.75 or k == deg:
            terms[(k, 0, 0, 0)] = Fraction(rng.randint(-5, 5), rng.choice((1, 1, 2, 3)))
    if param and rng.random() < 0.3:
        terms[(rng.randint(0, min(deg, 1)), 0, 0, 1)] = rng.randint(-2, 2)
    return RationalPoly(NV, terms)


def random_element(rng: random.Random, param: bool = True) -> RationalPoly:
    r = rng.random()
    if r < 0.35:
        return felem(rng.randint(0, 8))
    if r < 0.7 or not param:
        return felem(Fraction(rng.randint(-9, 9), rng.choice((1, 2, 3, 4))))
    return felem(RationalPoly(NV, {(0, 0, 0, 0): rng.randint(-3, 3), (0, 0, 0, 1): rng.randint(1, 2)}))


def _affine_sampler(rng: random.Random):
    return random_element(rng)


AFFINE_FIBER = FiberDescriptor("affine-line", sampler=_affine_sampler)


def _family(p: RationalPoly) -> Family:
    return Family(AFFINE_FIBER, lambda i, p=p: poly_substitute(p, {X: felem(i)}), "polynomial", p)


def _serialize(obj):
    if isinstance(obj, RationalPoly):
        return obj.format()
    if isinstance(obj, Family):
        return {"family": "polynomial", "poly": obj.data.format() if obj.data is not None else None}
    if isinstance(obj, (list, tuple)):
        return [_serialize(o) for o in obj]
    if isinstance(obj, dict):
        return {k: _serialize(v) for k, v in obj.items()}
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def make_faulhaber_adder(name: str = "faulhaber", family_degree: int = 2, param: bool = True) -> AdderInstance:
    def sum_op(x, f: Family):
        return faulhaber_sum(x, f.data)

    def flatten_op(x, f: Family, p: FlatPair):
        return flatten_eval(f.data, p.outer, p.inner)

    def boxtimes_op(x, f, g):
        try:
            return _family(faulhaber_boxtimes(f.data, g.data))
        except PolyError as exc:
            raise Skip(str(exc)) from exc

    def pullback_op(x, f, g, i):
        return _family(faulhaber_pullback(f.data, g.data, i))

    def bifamily(x, y, rng):
        # F in X (index over x) and Y (index over y)
        terms = {}
        for _ in range(rng.randint(1, 5)):
            terms[(rng.randint(0, 3), rng.randint(0, 3), 0, 0)] = Fraction(rng.randint(-4, 4), rng.choice((1, 2, 3)))
        poly = RationalPoly(NV, terms)
        dom = FiberDescriptor("product", components=(AFFINE_FIBER, AFFINE_FIBER))
        return Family(dom, lambda p: poly_substitute(poly, {Y: felem(p[0]), X: felem(p[1])}), "polynomial", poly)

    def partial_sum(x, y, F: Family, over: str):
        poly = F.data
        if over == "x":
            s = poly_substitute(sum_operator(poly, var=X), {X: felem(x)})
            return _family(poly_substitute(s, {Y: _VX}))      # now indexed by X over y
        return _family(poly_substitute(sum_operator(poly, var=Y), {Y: felem(y)}))

    return AdderInstance(
        name=name,
        elem_kind="Q[U]: rationals and polynomials in a parameter",
        unit_elem=felem(1),
        zero_elem=felem(0),
        has_zero=True,
        fiber_of=lambda x: AFFINE_FIBER,
        sum_op=sum_op,
        flatten_op=flatten_op,
        equality=EqualityNotion.exact(),
        elem_gen=lambda rng: random_element(rng, param),
        family_gen=lambda x, rng: _family(random_family_poly(rng, family_degree, param)),
        commutative_flag=True,
        const_family_op=lambda x, v: _family(felem(v)),
        boxtimes_op=boxtimes_op,
        pullback_op=pullback_op,
        bifamily_gen=bifamily,
        partial_sum_op=partial_sum,
        scale_family_op=lambda y, f: _family(f.data * felem(y)),
        serializer=_serialize,
        description="polynomial families summed with Faulhaber polynomials",
    )


def faulhaber_axiom_identities(cases: int = 50, seed: int = 0, max_degree: int = 5) -> CheckResult:
    """Exact polynomial identities in a symbolic element: the shift law,
    sum associativity, additivity and Fubini, for families up to
    ``max_degree``.  x is the symbolic parameter U and y is Z."""
    x, y = _VU, _VZ

    def case(rng):
        f = random_family_poly(rng, max_degree, param=False)
        g = random_family_poly(rng, max_degree, param=False)
        # shift law
        lhs, rhs = shift_law_sides(f, x, y)
        if lhs != rhs:
            return failure_record_plain("shift_law", f, g, lhs, rhs)
        # sum associativity
        s = faulhaber_sum(x, f)
        lhs = poly_substitute(sum_operator(g, var=X), {X: s})
        rhs = faulhaber_sum(x, faulhaber_boxtimes(f, g))
        if lhs != rhs:
            return failure_record_plain("sum_assoc", f, g, lhs, rhs)
        # additivity
        if faulhaber_sum(x, f + g) != faulhaber_sum(x, f) + faulhaber_sum(x, g):
            return failure_record_plain("additivity", f, g, faulhaber_sum(x, f + g),
                                        faulhaber_sum(x, f) + faulhaber_sum(x, g))
        # Fubini for F(X, Y) = f(X) g(Y) + X*Y^2
        F = f * poly_substitute(g, {X: _VY}) + _VX * _VY * _VY
        a = poly_substitute(sum_operator(poly_substitute(sum_operator(F, var=X), {X: x}), var=Y), {Y: y})
        b = poly_substitute(sum_operator(poly_substitute(sum_operator(F, var=Y), {Y: y}), var=X), {X: x})
        if a != b:
            return failure_record_plain("fubini", f, g, a, b)
        return None

    return drive_cases("faulhaber_identities", _IdentityLabel, cases, seed, case)


class _IdentityLabel:
    name = "faulhaber"


def failure_record_plain(law, f, g, lhs, rhs) -> dict:
    return {"inputs": {"law": law, "f": f.format(), "g": g.format()}, "lhs": lhs.format(), "rhs": rhs.format()}


def identity_by_points(p: RationalPoly, q: RationalPoly) -> bool:
    """Certify a univariate identity in U by evaluating at deg + 1 naturals."""
    pu = RationalPoly(1, {(e[U],): c for e, c in p.terms.items()})
    qu = RationalPoly(1, {(e[U],): c for e, c in q.terms.items()})
    if p.variables() - {U} or q.variables() - {U}:
        raise PolyError("point certification expects polynomials in U only")
    return poly_identity_check_by_points(pu, qu, max(pu.degree(), qu.degree(), 0) + 1)


def check_parameter_naturality(cases: int = 100, seed: int = 0) -> CheckResult:
    """(Sum^x f)[U := r] == Sum^{x[U := r]} f[U := r] for polynomial reindexings r."""
    adder = make_faulhaber_adder()

    def case(rng):
        x = random_element(rng)
        f = random_family_poly(rng, 3)
        r = RationalPoly(NV, {(0, 0, 0, 0): rng.randint(-2, 2), (0, 0, 0, rng.randint(1, 2)): rng.randint(1, 3)})
        lhs = poly_substitute(faulhaber_sum(x, f), {U: r})
        rhs = faulhaber_sum(poly_substitute(x, {U: r}), poly_substitute(f, {U: r}))
        if lhs != rhs:
            return failure_record(adder, {"x": x, "f": f, "r": r}, lhs, rhs)
        return None
    return drive_cases("parameter_naturality", adder, cases, seed, case)


__all__ = [
    "X", "Y", "Z", "U",
    "felem",
    "ffamily",
    "faulhaber_sum",
    "faulhaber_sum_at",
    "faulhaber_flatten",
    "flatten_eval",
    "faulhaber_boxtimes",
    "faulhaber_pullback",
    "shift_law_sides",
    "random_family_poly",
    "random_element",
    "make_faulhaber_adder",
    "faulhaber_axiom_identities",
    "identity_by_points",
    "check_parameter_naturality",
]
