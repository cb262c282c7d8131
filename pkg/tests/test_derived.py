import random

import pytest
from hypothesis import given, strategies as st

from depsum.continuous import make_real_adder
from depsum.derived import (
    Fibration,
    all_maps,
    boxtimes,
    check_boxtimes_assoc_nat_exhaustive,
    check_fib_category,
    check_monoid_laws,
    check_phi_functorial,
    check_right_distributivity,
    compose_maps,
    enumerate_fib_category,
    fib_compose,
    fib_identity,
    fibrations_equal,
    phi_composition_sides,
    phi_finset,
    phi_hom_counts,
    product,
)
from depsum.discrete import (
    as_table,
    f1_families,
    make_f1_adder,
    make_int_adder,
    make_monoid_adder,
    make_nat_adder,
    nat_boxtimes,
    table_family,
)
from depsum.fincat import FinCat, arrow, cat_iso
from depsum.ordinal import W, make_ord_adder, nat

NAT = make_nat_adder()


def test_nat_boxtimes_example():
    f, g = table_family([2, 1]), table_family([1, 1, 1])
    assert as_table(boxtimes(NAT, 2, f, g)) == (2, 1)


def test_nat_boxtimes_matches_nested_sums():
    rng = random.Random(0)
    for _ in range(200):
        x = rng.randint(0, 5)
        f = [rng.randint(0, 4) for _ in range(x)]
        g = [rng.randint(0, 4) for _ in range(sum(f))]
        h = nat_boxtimes(x, f, g)
        # entry i is the sum of g over the i-th block of consecutive indices
        starts = [sum(f[:i]) for i in range(x)]
        assert h == tuple(sum(g[s:s + n]) for s, n in zip(starts, f))


def test_products():
    assert product(NAT, 3, 4) == 12
    assert product(NAT, 1, 7) == 7
    ordinal = make_ord_adder()
    two, w = nat(2), W
    assert ordinal.serialize(product(ordinal, two, w)) == "w"
    assert ordinal.serialize(product(ordinal, w, two)) == "w*2"


@pytest.mark.parametrize("make", [make_nat_adder, make_int_adder, make_f1_adder, make_ord_adder,
                                  lambda: make_real_adder("real")], ids=["nat", "int", "f1", "ord", "real"])
def test_monoid_laws(make):
    res = check_monoid_laws(make(), cases=80, seed=1)
    assert res.passed, res.failures[:1]


def test_ord_product_non_commutative_witness():
    res = check_monoid_laws(make_ord_adder(), cases=200, seed=0)
    assert any(n.startswith("non-commutative") for n in res.notes)


def test_word_monoid_product_laws():
    res = check_monoid_laws(make_monoid_adder(), cases=100, seed=0)
    assert res.passed, res.failures[:1]


@pytest.mark.parametrize("make", [make_nat_adder, make_int_adder], ids=["nat", "int"])
def test_right_distributivity(make):
    res = check_right_distributivity(make(), cases=100, seed=2)
    assert res.passed, res.failures[:1]


@pytest.mark.parametrize("make", [make_nat_adder, make_f1_adder, make_ord_adder], ids=["nat", "f1", "ord"])
def test_fib_category_laws(make):
    res = check_fib_category(make(), cases=80, seed=3)
    assert res.passed, res.failures[:1]


def test_fib_compose_rejects_mismatch():
    f = Fibration.of(NAT, 2, table_family([1, 1]))
    g = Fibration.of(NAT, 3, table_family([1, 0, 0]))
    with pytest.raises(ValueError):
        fib_compose(NAT, f, g)


def test_phi_counts_fibers():
    fib = phi_finset((1, 1, 2), 2)
    assert as_table(fib.family) == (2, 1)
    assert (fib.domain, fib.codomain) == (3, 2)
    with pytest.raises(ValueError):
        phi_finset((3,), 2)


def test_phi_of_identity_is_identity():
    for n in range(6):
        assert fibrations_equal(phi_finset(tuple(range(1, n + 1)), n), fib_identity(NAT, n))


def test_phi_respects_composition_of_monotone_maps():
    res = check_phi_functorial(max_size=6, seed=0, monotone_only=True)
    assert res.passed, res.failures[:1]


def test_phi_fails_on_a_transposition():
    # f: [1] -> [2] hits 1, g swaps 1 and 2
    lhs, rhs = phi_composition_sides((2, 1), (1,), 2, 2)
    assert lhs == (0, 1)
    assert rhs == (1, 0)


def test_phi_hom_counts():
    assert phi_hom_counts(2, 2) == {"finset": 4, "monotone": 3, "fib": 3, "image": 3, "monotone_image": 3}
    c = phi_hom_counts(3, 2)
    assert c["finset"] == 8 and c["fib"] == 4 and c["image"] == 4


def test_boxtimes_assoc_exhaustive():
    res = check_boxtimes_assoc_nat_exhaustive(max_len=3, max_entry=3)
    assert res.passed
    assert res.cases_run > 1000


def test_f1_fib_category_is_the_arrow():
    f1 = make_f1_adder()
    table = enumerate_fib_category(f1, [0, 1], f1_families)
    assert len(table["morphisms"]) == 3
    assert not any(m["src"] == 1 and m["tgt"] == 0 for m in table["morphisms"])
    ids = set(table["identities"])
    morphs = [(m["id"], m["src"], m["tgt"]) for m in table["morphisms"]]
    comp = {(a, b): c for a, b, c in table["compose"] if a not in ids and b not in ids}
    cat = FinCat([0, 1], morphs, table["identities"], comp)
    assert cat_iso(cat, arrow()) is not None


@given(st.lists(st.integers(1, 4), max_size=6), st.integers(0, 2 ** 32))
def test_phi_functorial_on_sorted_maps(f_raw, seed):
    rng = random.Random(seed)
    m = max(f_raw, default=1)
    f = tuple(sorted(f_raw))
    k = rng.randint(1, 4)
    g = tuple(sorted(rng.randint(1, k) for _ in range(m)))
    lhs, rhs = phi_composition_sides(g, f, m, k)
    assert lhs == rhs
    assert sum(lhs) == len(compose_maps(g, f))


def test_all_maps_count():
    assert sum(1 for _ in all_maps(3, 2)) == 8
