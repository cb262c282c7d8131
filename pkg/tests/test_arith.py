from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from depsum.arith import (
    PolyError,
    RationalPoly,
    bernoulli,
    faulhaber_poly,
    poly_compose,
    poly_identity_check_by_points,
    poly_substitute,
    sum_operator,
)

X = RationalPoly.var(0)


def akiyama_tanigawa(n):
    """Independent Bernoulli oracle; this algorithm yields B1 = +1/2."""
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    return a[0]


def poly(coeffs):
    return RationalPoly.from_coeffs([Fraction(c) for c in coeffs])


coeff_lists = st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=7), min_size=1, max_size=7)


def test_bernoulli_examples():
    assert bernoulli(0) == 1
    assert bernoulli(1) == Fraction(1, 2)
    assert bernoulli(2) == Fraction(1, 6)


def test_bernoulli_frozen_table():
    frozen = [Fraction(1), Fraction(1, 2), Fraction(1, 6), 0, Fraction(-1, 30), 0, Fraction(1, 42), 0,
              Fraction(-1, 30), 0, Fraction(5, 66), 0, Fraction(-691, 2730)]
    assert [bernoulli(n) for n in range(13)] == frozen


@pytest.mark.parametrize("n", range(25))
def test_bernoulli_matches_independent_oracle(n):
    assert bernoulli(n) == akiyama_tanigawa(n)


@pytest.mark.parametrize("k", range(1, 11))
def test_odd_bernoulli_vanish(k):
    assert bernoulli(2 * k + 1) == 0


def test_faulhaber_low_degrees():
    assert faulhaber_poly(0) == X
    assert faulhaber_poly(1) == (X * X + X) / 2
    assert faulhaber_poly(2)(3) == 14
    assert str(faulhaber_poly(2)) == "(2*X^3 + 3*X^2 + X)/6"


def test_faulhaber_brute_force():
    for d in range(9):
        F = faulhaber_poly(d)
        total = 0
        assert F(0) == 0
        for m in range(1, 51):
            total += m ** d
            assert F(m) == total, (d, m)


def test_sum_operator_examples():
    assert sum_operator(RationalPoly.const(1)) == X
    assert sum_operator(X) == (X * X + X) / 2
    assert sum_operator(X * X)(4) == 30


def test_compose_substitute_eval():
    assert poly_compose(X * X, X + 1) == X * X + 2 * X + 1
    Y = RationalPoly.var(1, 2)
    g = Y * Y
    assert poly_substitute(g, {1: RationalPoly.var(0, 2)}) == RationalPoly.var(0, 2) ** 2
    assert ((X * X + X) / 2)(10) == 55


def test_identity_by_points():
    assert poly_identity_check_by_points(X * X, X * X, 3)
    assert not poly_identity_check_by_points(X, X + 1, 3)
    assert poly_identity_check_by_points(sum_operator(X) * 2, X * X + X, 3)


def test_format_constant_and_negative():
    assert str(RationalPoly.const(0)) == "0"
    assert str(1 - X) == "-X + 1"


def test_degree_cap_enforced():
    with pytest.raises(PolyError):
        X ** 100


@given(coeff_lists, coeff_lists)
def test_sum_operator_linear(a, b):
    p, q = poly(a), poly(b)
    assert sum_operator(p + q) == sum_operator(p) + sum_operator(q)
    assert sum_operator(p * 3) == sum_operator(p) * 3


@given(coeff_lists)
def test_sum_operator_telescopes(a):
    # S(n) - S(n - 1) = p(n) and S(0) = 0
    p = poly(a)
    S = sum_operator(p)
    assert S(0) == 0
    assert S - poly_compose(S, X - 1) == p


@given(coeff_lists, coeff_lists, coeff_lists)
def test_ring_laws(a, b, c):
    p, q, r = poly(a), poly(b), poly(c)
    assert (p + q) + r == p + (q + r)
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r


@given(coeff_lists, st.integers(-20, 20))
def test_eval_matches_horner(a, n):
    p = poly(a)
    horner = Fraction(0)
    for c in reversed(a):
        horner = horner * n + c
    assert p(n) == horner
