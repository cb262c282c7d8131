import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from depsum.derived import check_monoid_laws, product
from depsum.instances import run_suite
from depsum.ordinal import (
    ONE,
    W,
    ZERO,
    CnfOrdinal,
    OrdinalError,
    StepFamily,
    cnf_add,
    cnf_cmp,
    cnf_divmod,
    cnf_left_sub,
    cnf_mul,
    make_ord_adder,
    nat,
    ord_flatten_eval,
    ord_fubini_counterexamples,
    ord_sum,
    ord_sum_recursion,
    parse_ordinal,
    random_ordinal,
    random_step_family,
)

P = parse_ordinal
ordinals = st.integers(0, 2 ** 32).map(lambda s: random_ordinal(random.Random(s), height=2, max_terms=3))


# an independent model of ordinals below w^w: coefficient dicts {exponent: coef}

def to_poly(a: CnfOrdinal) -> dict:
    out = {}
    for e, c in a.terms:
        assert e.is_finite(), "oracle covers ordinals below w^w"
        out[int(e)] = c
    return out


def poly_add(a: dict, b: dict) -> dict:
    if not b:
        return dict(a)
    lead = max(b)
    out = {e: c for e, c in a.items() if e > lead}
    out[lead] = a.get(lead, 0) + b[lead]
    out.update({e: c for e, c in b.items() if e < lead})
    return out


def poly_mul(a: dict, b: dict) -> dict:
    """Right distributivity over the terms of b, with a * w^e = w^(lead a + e)
    for e > 0 and a * n repeated addition."""
    if not a:
        return {}
    out: dict = {}
    for e in sorted(b, reverse=True):
        if e == 0:
            piece: dict = {}
            for _ in range(b[e]):
                piece = poly_add(piece, a)
        else:
            piece = {max(a) + e: b[e]}
        out = poly_add(out, piece)
    return out


small = st.integers(0, 2 ** 32).map(lambda s: random_ordinal(random.Random(s), height=1, max_terms=3))


def test_addition_examples():
    assert cnf_add(W, ONE) == P("w + 1")
    assert cnf_add(ONE, W) == W
    assert cnf_add(P("w*2"), P("w^2")) == P("w^2")
    assert cnf_left_sub(W, P("w*2")) == W


def test_parse_and_format():
    for text in ("0", "7", "w", "w + 1", "w*2", "w^2 + w*3 + 4", "w^w", "w^(w + 1)*2"):
        assert str(P(text)) == text
    with pytest.raises(OrdinalError):
        P("w +")


def test_ord_sum_examples():
    assert ord_sum(W, StepFamily.const(W, 1)) == W
    assert ord_sum(nat(2), StepFamily.const(nat(2), W)) == P("w*2")
    assert ord_sum(W, StepFamily.const(W, 2)) == W


def test_flatten_examples():
    assert ord_flatten_eval(nat(2), StepFamily.const(nat(2), W), nat(1), nat(3)) == P("w + 3")
    assert ord_flatten_eval(nat(2), StepFamily.const(nat(2), W), ZERO, ZERO) == ZERO
    assert ord_flatten_eval(W, StepFamily.const(W, 1), nat(5), ZERO) == nat(5)


def test_noncommutative_product():
    ord_ = make_ord_adder()
    assert product(ord_, nat(2), W) == W
    assert product(ord_, W, nat(2)) == P("w*2")
    assert W != P("w*2")


def test_fubini_counterexamples_differ():
    ord_ = make_ord_adder()
    found = False
    for x, y, F in ord_fubini_counterexamples():
        a = ord_.sum_op(y, ord_.partial_sum(x, y, F, "x"))
        b = ord_.sum_op(x, ord_.partial_sum(x, y, F, "y"))
        found |= a != b
    assert found


def test_step_family_validation():
    with pytest.raises(OrdinalError):
        StepFamily(nat(3), [(nat(2), ONE)])
    with pytest.raises(OrdinalError):
        StepFamily(nat(3), [(nat(2), ONE), (nat(1), ONE), (nat(3), ONE)])
    f = StepFamily(nat(3), [(nat(1), ONE), (nat(3), ONE)])
    assert f.pieces == ((nat(3), ONE),)
    with pytest.raises(OrdinalError):
        f(nat(3))


def test_recursion_oracle_exhaustive_small():
    # every family over alpha <= 12 with values <= 12, as step families of up to two pieces
    for alpha in range(13):
        for cut in range(1, alpha + 1):
            for v1 in range(0, 13, 3):
                for v2 in range(0, 13, 4):
                    pieces = [(nat(alpha), nat(v1))] if cut == alpha else [(nat(cut), nat(v1)), (nat(alpha), nat(v2))]
                    f = StepFamily(nat(alpha), pieces)
                    assert ord_sum(nat(alpha), f) == ord_sum_recursion(alpha, f)
    assert ord_sum(ZERO, StepFamily.const(ZERO, W)) == ZERO


def test_recursion_oracle_with_transfinite_values():
    rng = random.Random(4)
    for _ in range(300):
        n = rng.randint(0, 12)
        f = random_step_family(rng, nat(n), value_height=2)
        assert ord_sum(nat(n), f) == ord_sum_recursion(n, f)


def test_flatten_strictly_monotone():
    rng = random.Random(9)
    for _ in range(100):
        n = rng.randint(1, 6)
        f = StepFamily(nat(n), [(nat(n), nat(rng.randint(1, 4)))])
        pts = [(i, j) for i in range(n) for j in range(int(f(nat(i))))]
        vals = [ord_flatten_eval(nat(n), f, nat(i), nat(j)) for i, j in pts]
        assert all(cnf_cmp(a, b) < 0 for a, b in zip(vals, vals[1:]))
        assert vals == [nat(k) for k in range(len(vals))]


def test_flatten_monotone_transfinite():
    f = StepFamily(nat(3), [(nat(1), W), (nat(3), nat(2))])
    pts = [(0, j) for j in range(5)] + [(1, 0), (1, 1), (2, 0), (2, 1)]
    vals = [ord_flatten_eval(nat(3), f, nat(i), nat(j)) for i, j in pts]
    assert all(cnf_cmp(a, b) < 0 for a, b in zip(vals, vals[1:]))
    assert vals[5] == W


@given(small, small)
def test_add_mul_match_independent_model(a, b):
    assert to_poly(cnf_add(a, b)) == poly_add(to_poly(a), to_poly(b))
    assert to_poly(cnf_mul(a, b)) == poly_mul(to_poly(a), to_poly(b))


@given(ordinals, ordinals, ordinals)
def test_arithmetic_laws(a, b, c):
    assert cnf_add(cnf_add(a, b), c) == cnf_add(a, cnf_add(b, c))
    assert cnf_mul(cnf_mul(a, b), c) == cnf_mul(a, cnf_mul(b, c))
    assert cnf_mul(a, cnf_add(b, c)) == cnf_add(cnf_mul(a, b), cnf_mul(a, c))
    assert cnf_cmp(a, cnf_add(a, b)) <= 0
    assert cnf_add(a, ZERO) == a == cnf_add(ZERO, a)
    assert cnf_mul(a, ONE) == a == cnf_mul(ONE, a)


@given(ordinals, ordinals)
def test_left_subtraction_inverts_addition(a, b):
    lo, hi = (a, b) if cnf_cmp(a, b) <= 0 else (b, a)
    assert cnf_add(lo, cnf_left_sub(lo, hi)) == hi


@given(ordinals, ordinals)
def test_divmod(a, b):
    if b.is_zero():
        return
    q, r = cnf_divmod(a, b)
    assert cnf_add(cnf_mul(b, q), r) == a
    assert cnf_cmp(r, b) < 0


@given(ordinals, ordinals)
def test_order_is_total_and_antisymmetric(a, b):
    assert cnf_cmp(a, b) == -cnf_cmp(b, a)
    assert (cnf_cmp(a, b) == 0) == (a == b)


@given(ordinals)
def test_format_round_trip(a):
    assert P(str(a)) == a


def test_ord_monoid_laws_and_flags():
    ord_ = make_ord_adder()
    assert not ord_.commutative_flag
    assert ord_.has_zero
    res = check_monoid_laws(ord_, cases=200)
    assert res.passed
    assert any(n.startswith("non-commutative") for n in res.notes)


@pytest.mark.parametrize("axiom", ["right_unit", "left_unit", "sum_assoc", "flatten_assoc"])
def test_ord_core_suite_300(axiom):
    res = run_suite("ord", axiom, cases=300, seed=1)
    assert res.passed and res.cases_run == 300
