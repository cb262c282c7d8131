import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from depsum.core import AXIOMS, check_linear_map, check_naturality, check_right_module
from depsum.derived import check_right_distributivity, product
from depsum.discrete import (
    FreeMonoid,
    additive_nat_module,
    cyclic_monoid,
    exhaustive_nat_tables,
    f1_family,
    f1_pointed_module,
    f1_sum,
    int_family,
    int_sum,
    make_f1_adder,
    make_int_adder,
    make_monoid_adder,
    make_nat_adder,
    monoid_adder_sum,
    monoid_from_nat_module,
    nat_boxtimes,
    nat_flatten,
    nat_module_from_monoid,
    nat_sum,
    random_finite_monoid,
    table_family,
    transformation_monoid,
)
from depsum.instances import run_suite

nat_tables = st.lists(st.integers(0, 6), max_size=6)


def test_nat_sum_examples():
    assert nat_sum(3, table_family([1, 2, 3])) == 6
    assert nat_sum(0, table_family([])) == 0
    assert nat_sum(5, table_family([1] * 5)) == 5


def test_nat_sum_rejects_wrong_length():
    with pytest.raises(ValueError):
        nat_sum(2, table_family([1, 2, 3]))


def test_nat_flatten_examples():
    f = table_family([2, 3])
    assert nat_flatten(2, f, 2, 1) == 3
    assert nat_flatten(2, f, 1, 1) == 1
    assert nat_flatten(2, f, 2, 3) == 5 == nat_sum(2, f)


def test_nat_flatten_out_of_range():
    with pytest.raises(IndexError):
        nat_flatten(2, table_family([2, 3]), 1, 3)


def test_nat_flatten_is_bijection_exhaustive():
    for vals in exhaustive_nat_tables(4, 3):
        f = table_family(vals)
        image = [nat_flatten(len(vals), f, i, j) for i in range(1, len(vals) + 1) for j in range(1, vals[i - 1] + 1)]
        assert image == list(range(1, sum(vals) + 1))


@given(st.lists(st.integers(0, 5), max_size=8))
def test_nat_flatten_bijection_property(vals):
    f = table_family(vals)
    image = [nat_flatten(len(vals), f, i, j) for i in range(1, len(vals) + 1) for j in range(1, vals[i - 1] + 1)]
    assert image == list(range(1, sum(vals) + 1))


def test_nat_boxtimes_example():
    assert nat_boxtimes(2, table_family([2, 1]), table_family([1, 1, 1])) == (2, 1)


@given(nat_tables, st.data())
def test_nat_sum_assoc_property(fv, data):
    g = data.draw(st.lists(st.integers(0, 4), min_size=sum(fv), max_size=sum(fv)))
    f, gf = table_family(fv), table_family(g)
    assert nat_sum(sum(fv), gf) == nat_sum(len(fv), table_family(nat_boxtimes(len(fv), f, gf)))


def test_int_sum_examples():
    assert int_sum(-1, int_family((7,))) == -7
    assert int_sum(-2, int_family((0, 1))) == 1
    assert int_sum(3, int_family((0, 1))) == 6
    assert int_sum(0, int_family((0, 1))) == 0


@given(st.integers(-12, 12), st.lists(st.integers(-3, 3), min_size=1, max_size=3),
       st.lists(st.integers(-3, 3), min_size=1, max_size=3))
def test_int_sum_matches_loop(x, coeffs, per):
    f = int_family(coeffs, per)
    if x >= 0:
        want = sum(f(i) for i in range(1, x + 1))
    else:
        want = -sum(f(i) for i in range(x + 1, 1))
    assert int_sum(x, f) == want


def test_f1_sum_table():
    assert f1_sum(0, f1_family(0)) == 0
    assert f1_sum(1, f1_family(1, 1)) == 1
    assert f1_sum(1, f1_family(1, 0)) == 0


def test_f1_rejects_bad_values():
    with pytest.raises(ValueError):
        f1_family(1, 2)
    with pytest.raises(ValueError):
        f1_family(2)


def test_monoid_adder_sum_examples():
    mon = FreeMonoid("abc")
    assert monoid_adder_sum(mon, "ab", table_family(("c",))) == "cab"
    assert monoid_adder_sum(mon, "", table_family(("c",))) == "c"
    assert monoid_adder_sum(mon, "ab", table_family(("",))) == "ab"


def test_monoid_product_is_monoid_multiplication():
    adder = make_monoid_adder()
    for x, y in itertools.product(["", "a", "ab", "ba"], repeat=2):
        assert product(adder, x, y) == x + y


def test_nat_and_int_products_are_multiplication():
    nat, zz = make_nat_adder(), make_int_adder()
    assert product(nat, 3, 4) == 12
    for x in range(-4, 5):
        for y in range(-4, 5):
            assert product(zz, x, y) == x * y


def test_int_right_distributivity():
    assert check_right_distributivity(make_int_adder(), cases=200).passed


def test_naturality_examples():
    nat = make_nat_adder()
    assert check_naturality(nat, reindex={"c": "a"}, cases=50).passed
    assert check_naturality(make_int_adder(), reindex={"a": "b", "b": "a"}, cases=50).passed
    assert check_naturality(make_f1_adder(), cases=50).passed


@pytest.mark.parametrize("factory", [make_nat_adder, make_int_adder, make_f1_adder, make_monoid_adder])
@pytest.mark.parametrize("axiom", AXIOMS + ("boxtimes_assoc",))
def test_discrete_adders_500_cases(factory, axiom):
    name = factory().name
    res = run_suite(name, axiom, cases=500, seed=3)
    assert res.passed, res.failures[:1]


def test_monoid_adder_flags():
    adder = make_monoid_adder()
    assert not adder.commutative_flag
    assert not adder.has_zero
    assert make_monoid_adder(cyclic_monoid(4)).commutative_flag


def test_additive_module_fold():
    mod = additive_nat_module()
    assert mod.msum_op(3, table_family([1, 2, 3])) == 6
    assert check_right_module(mod, cases=100).passed


def test_pointed_set_empty_sum_is_basepoint():
    mod = f1_pointed_module()
    assert mod.msum_op(0, f1_family(0)) == "*"
    assert mod.msum_op(1, table_family(("b",))) == "b"
    assert check_right_module(mod, cases=100).passed


def test_linear_maps_on_naturals():
    mod = additive_nat_module()
    assert check_linear_map(lambda m: 2 * m, mod, mod, cases=100).passed
    assert check_linear_map(lambda m: m, mod, mod, cases=100).passed
    bad = check_linear_map(lambda m: m + 1, mod, mod, cases=100)
    assert not bad.passed
    assert any(f["inputs"]["x"] == 0 for f in bad.failures)


def test_monoid_module_round_trip():
    rng = random.Random(11)
    for _ in range(20):
        mon = random_finite_monoid(rng)
        mod = nat_module_from_monoid(mon)
        back = monoid_from_nat_module(mod, mon.elements)
        assert back == mon
        again = nat_module_from_monoid(back)
        for _ in range(5):
            n = rng.randint(0, 4)
            f = table_family([rng.choice(mon.elements) for _ in range(n)])
            assert again.msum_op(n, f) == mod.msum_op(n, f)


def test_transformation_monoid_is_noncommutative():
    mon = transformation_monoid([(1, 0, 2), (0, 0, 2)], 3)
    assert not mon.is_commutative()
    assert check_right_module(nat_module_from_monoid(mon), cases=100).passed
