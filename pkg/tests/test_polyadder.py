import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from depsum.arith import RationalPoly, poly_substitute
from depsum.core import check_fubini, check_naturality
from depsum.discrete import nat_flatten
from depsum.polyadder import (
    NV,
    U,
    X,
    Y,
    faulhaber_axiom_identities,
    faulhaber_boxtimes,
    faulhaber_flatten,
    faulhaber_sum,
    faulhaber_sum_at,
    felem,
    ffamily,
    flatten_eval,
    check_parameter_naturality,
    make_faulhaber_adder,
    random_family_poly,
    shift_law_sides,
)
from depsum.arith import PolyError

VX = RationalPoly.var(X, NV)
VY = RationalPoly.var(Y, NV)
VU = RationalPoly.var(U, NV)


def poly_from_coeffs(coeffs):
    return RationalPoly(NV, {(k, 0, 0, 0): Fraction(c) for k, c in enumerate(coeffs) if c})


def test_constant_one_sums_to_x():
    assert faulhaber_sum(VU, 1) == VU
    assert faulhaber_sum_at(7, 1) == 7


def test_identity_family_gives_triangular_numbers():
    assert faulhaber_sum_at(10, VX) == 55
    assert faulhaber_sum(VU, VX) == (VU * VU + VU) * Fraction(1, 2)


def test_squares():
    assert faulhaber_sum_at(4, VX * VX) == 30
    # negative and fractional arguments are allowed
    assert faulhaber_sum_at(-1, VX * VX) == 0
    assert faulhaber_sum_at(Fraction(1, 2), VX) == Fraction(3, 8)


def test_flatten_examples():
    assert faulhaber_flatten(1) == VY + VX - 1
    assert faulhaber_flatten(VX) == VY + (VX - 1) * VX * Fraction(1, 2)
    assert flatten_eval(VX, 2, 1) == felem(2)
    assert flatten_eval(VX, 2, 1) == felem(nat_flatten(2, (1, 2), 2, 1))


def test_shift_law_example():
    lhs, rhs = shift_law_sides(VX, felem(2), felem(3))
    assert lhs == rhs == felem(15)


@pytest.mark.parametrize("d", range(6))
def test_agrees_with_naive_sums(d):
    rng = random.Random(d)
    for _ in range(10):
        coeffs = [rng.randint(-4, 4) for _ in range(d + 1)]
        p = poly_from_coeffs(coeffs)
        for m in range(31):
            naive = sum(sum(Fraction(c) * i ** k for k, c in enumerate(coeffs)) for i in range(1, m + 1))
            assert faulhaber_sum_at(m, p) == naive


def test_boxtimes_matches_nested_sum_on_naturals():
    rng = random.Random(3)
    for _ in range(20):
        f = poly_from_coeffs([rng.randint(0, 3), rng.randint(0, 2)])
        g = poly_from_coeffs([rng.randint(-3, 3), rng.randint(-2, 2), rng.randint(-1, 1)])
        h = faulhaber_boxtimes(f, g)
        for m in range(8):
            lhs = faulhaber_sum_at(faulhaber_sum_at(m, f), g)
            assert faulhaber_sum_at(m, h) == lhs


def test_family_validation():
    with pytest.raises(PolyError):
        ffamily(VY)
    with pytest.raises(PolyError):
        felem(VX)
    with pytest.raises(PolyError):
        ffamily(VX ** 11)


def test_exact_identities():
    res = faulhaber_axiom_identities(cases=60, seed=1)
    assert res.passed, res.failures[:1]
    assert res.cases_run == 60


def test_parameter_naturality():
    res = check_parameter_naturality(cases=60, seed=2)
    assert res.passed, res.failures[:1]


def test_adder_axioms_sample():
    inst = make_faulhaber_adder()
    for check in (check_fubini, check_naturality):
        res = check(inst, cases=40, seed=5)
        assert res.passed, res.failures[:1]


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=5), st.integers(-6, 12), st.integers(-6, 12))
def test_shift_law_property(coeffs, x, y):
    lhs, rhs = shift_law_sides(poly_from_coeffs(coeffs), felem(x), felem(y))
    assert lhs == rhs


@given(st.integers(0, 2 ** 32))
def test_sum_is_additive_and_telescopes(seed):
    rng = random.Random(seed)
    f = random_family_poly(rng, 4, param=False)
    g = random_family_poly(rng, 4, param=False)
    assert faulhaber_sum(VU, f + g) == faulhaber_sum(VU, f) + faulhaber_sum(VU, g)
    s = faulhaber_sum(VU, f)
    diff = s - poly_substitute(s, {U: VU - 1})
    assert diff == poly_substitute(f, {X: VU})
