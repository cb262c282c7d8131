import json
import random
from pathlib import Path

import pytest

from depsum.fintop import (
    FinTop,
    OpenMap,
    Presheaf,
    PresheafMap,
    TopologyError,
    boxtimes_presheaf,
    check_eps_monotone,
    check_phi_homeomorphism,
    check_unit_etale,
    et_pullback_map,
    etale,
    etale_map,
    find_homeomorphism,
    from_subbasis,
    generated_opens,
    is_homeomorphism,
    point_space,
    preorder_isomorphism,
    pullback_presheaf,
    random_presheaf,
    random_space,
    sierpinski,
    space_catalog,
    stalk,
    sum_assoc_triple,
)

FIXTURES = Path(__file__).parent / "fixtures"


def sierpinski_presheaf():
    X = sierpinski()
    whole, top, none = frozenset({0, 1}), frozenset({X.index("o")}), frozenset()
    secs = {whole: ("a", "b"), top: ("*",), none: ("*",)}
    return Presheaf.build(X, lambda U: secs[U], lambda U, V, s: s if U == V else "*")


def test_sierpinski_opens():
    X = sierpinski()
    assert {frozenset(X.labels(U)) for U in X.opens} == {frozenset(), frozenset({"o"}), frozenset({"o", "c"})}


def test_fixture_matches_builder():
    data = json.loads((FIXTURES / "sierpinski_presheaf.json").read_text())
    F = Presheaf.from_json(data)
    assert etale(F).space.n == 3


def test_stalks():
    F = sierpinski_presheaf()
    X = F.space
    assert len(stalk(F, X.index("o"))) == 1
    assert len(stalk(F, X.index("c"))) == 2
    one = Presheaf.constant(X, ("*",))
    assert all(len(stalk(one, x)) == 1 for x in range(X.n))


def test_sierpinski_etale():
    F = sierpinski_presheaf()
    E = etale(F, check_projection=True)
    assert E.space.n == 3
    pts = {E.space.points[i] for i in E.eps(frozenset({0, 1}), "a")}
    assert pts == {("o", "*"), ("c", "a")}


def test_empty_presheaf_and_space():
    X = sierpinski()
    assert etale(Presheaf.constant(X, ())).space.n == 0
    assert etale(Presheaf.constant(space_catalog()["empty"], ("*",))).space.n == 0


def test_unit_etale_on_catalog():
    res = check_unit_etale()
    assert res.passed and res.cases_run == len(space_catalog())


def test_etale_map_of_identity():
    F = sierpinski_presheaf()
    m = etale_map(PresheafMap.identity(F))
    assert m.fn == tuple(range(m.src.n))


def test_pullback_along_identity():
    F = sierpinski_presheaf()
    ident = OpenMap(F.space, F.space, range(F.space.n))
    m = et_pullback_map(ident, F)
    assert sorted(m.fn) == list(range(m.tgt.n))
    assert is_homeomorphism(m.src, m.tgt, m.fn)


def test_pullback_of_collapse():
    X, P = sierpinski(), point_space()
    f = OpenMap(X, P, [0, 0])
    F = Presheaf.constant(P, (1, 2))
    pb = pullback_presheaf(f, F)
    assert all(pb(U) == (1, 2) for U in X.opens)
    m = et_pullback_map(f, F)
    assert (m.src.n, m.tgt.n) == (4, 2)
    assert sorted(set(m.fn)) == [0, 1]


def test_non_open_map_rejected():
    X, Y = sierpinski(), space_catalog()["discrete2"]
    with pytest.raises(TopologyError):
        OpenMap(Y, X, [0, 1])


def test_boxtimes_with_singleton_is_unit():
    F = sierpinski_presheaf()
    EF = etale(F)
    one = Presheaf.constant(EF.space, ("*",))
    B = boxtimes_presheaf(F, one, EF)
    assert all(len(B(U)) == len(F(U)) for U in F.space.opens)


def test_boxtimes_over_singleton_is_transport():
    X = space_catalog()["vee"]
    one = Presheaf.constant(X, ("*",))
    E = etale(one)
    G = random_presheaf(E.space, random.Random(2), max_germs=6)
    B = boxtimes_presheaf(one, G, E)
    for U in X.opens:
        assert len(B(U)) == len(G(E.eps(U, "*")))


def test_boxtimes_section_counts_sierpinski():
    F = sierpinski_presheaf()
    EF = etale(F)
    G = Presheaf.constant(EF.space, (0, 1))
    B = boxtimes_presheaf(F, G, EF)
    counts = {frozenset(F.space.labels(U)): len(B(U)) for U in F.space.opens}
    assert counts == {frozenset({"o", "c"}): 4, frozenset({"o"}): 2, frozenset(): 2}


def test_phi_on_sierpinski():
    F = sierpinski_presheaf()
    G = Presheaf.constant(etale(F).space, ("*",))
    assert sum_assoc_triple(F.space, F, G) is None


def test_phi_suite():
    res = check_phi_homeomorphism(cases=50, seed=0)
    assert res.passed, res.failures[:1]
    assert res.cases_run == 50


def test_eps_monotone():
    assert check_eps_monotone(cases=40, seed=1).passed


def test_presheaf_validation():
    X = sierpinski()
    whole, top, none = frozenset({0, 1}), frozenset({X.index("o")}), frozenset()
    secs = {whole: ("a",), top: ("*",), none: ("*",)}
    with pytest.raises(TopologyError):
        Presheaf.build(X, lambda U: secs[U], lambda U, V, s: "zzz" if U != V else s)


def test_presheaf_json_round_trip():
    F = sierpinski_presheaf()
    back = Presheaf.from_json(json.loads(json.dumps(F.to_json())))
    assert back.sections == F.sections and back.restrict == F.restrict


def test_generated_topology_two_routes():
    rng = random.Random(5)
    for _ in range(100):
        n = rng.randint(1, 5)
        gens = [frozenset(x for x in range(n) if rng.random() < 0.5) for _ in range(rng.randint(0, 4))]
        assert set(from_subbasis(list(range(n)), gens).opens) == set(generated_opens(n, gens))


def test_homeomorphism_routes_agree():
    rng = random.Random(6)
    for _ in range(150):
        X, Y = random_space(rng), random_space(rng)
        assert (find_homeomorphism(X, Y) is None) == (preorder_isomorphism(X, Y) is None)


def test_projection_is_open_surjection():
    rng = random.Random(7)
    for _ in range(40):
        X = random_space(rng)
        F = random_presheaf(X, rng)
        E = etale(F, check_projection=True)
        assert set(E.projection.fn) == {x for x in range(X.n) if stalk(F, x)}


def test_fintop_from_opens_rejects_non_topology():
    with pytest.raises(TopologyError):
        FinTop.from_opens([0, 1, 2], [[0, 1], [1, 2]])
