import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from depsum import _kernels
from depsum.continuous import (
    AnalyticFamily,
    BoxFamily,
    ComplexPoly,
    MatrixMap,
    QuadratureError,
    QuadratureSpec,
    VecFamily,
    check_basis_oracle,
    check_closure,
    check_path_independence,
    check_substitution,
    complex_path_sum,
    cumint,
    integrate,
    make_interval_module,
    make_real_adder,
    make_vector_module,
    path_integral,
    random_basis,
    real_flatten,
    real_sum,
    substitution_check,
    substitution_sides,
    vector_module_sum,
)
from depsum.core import check_linear_map

T = AnalyticFamily([("mono", 1, 1.0)])
ONE = AnalyticFamily.const(1.0)


def test_integrate_basic():
    assert integrate(T, 0.0, 1.0) == pytest.approx(0.5, abs=1e-10)
    assert integrate(lambda t: np.sin(t), 0.0, math.pi) == pytest.approx(2.0, abs=1e-9)
    # orientation
    assert integrate(T, 1.0, 0.0) == pytest.approx(-0.5, abs=1e-10)


def test_real_sum_and_flatten():
    assert real_sum(1.0, T) == pytest.approx(0.5, abs=1e-10)
    assert real_sum(-1.0, T) == pytest.approx(0.5, abs=1e-10)
    assert real_flatten(3.0, ONE, (1.25, 0.4)) == pytest.approx(1.25, abs=1e-10)


def test_box_family_formula():
    # f = 1, g = t: (f box g)(t) = t, so its integral to x is x^2 / 2
    box = BoxFamily(ONE, T)
    assert box(0.7) == pytest.approx(0.7, abs=1e-9)
    assert real_sum(2.0, box) == pytest.approx(2.0, abs=1e-8)
    # sum associativity on one case: integral_0^{F(x)} g = integral_0^x f box g
    f = AnalyticFamily([("cos", 1, 1.0)])
    g = AnalyticFamily([("mono", 2, 1.0)])
    x = 1.3
    assert real_sum(real_sum(x, f), g) == pytest.approx(real_sum(x, BoxFamily(f, g)), abs=1e-8)


def test_cumint_matches_antiderivative():
    f = AnalyticFamily([("mono", 3, 1.0), ("sin", 2, -0.5), ("exp", 0.5, 2.0)])
    t = np.array([-1.5, 0.0, 0.3, 2.0, 2.0, -0.2])
    assert np.allclose(cumint(f, t), f.antiderivative(t), atol=1e-9)


def test_substitution_examples():
    lhs, rhs = substitution_sides(T, AnalyticFamily([("mono", 2, 1.0)]), 2.0)
    assert lhs == pytest.approx(8.0, abs=1e-8)
    assert rhs == pytest.approx(8.0, abs=1e-8)
    cos = AnalyticFamily([("cos", 1, 1.0)])
    sin = AnalyticFamily([("sin", 1, 1.0)])
    assert substitution_check(cos, sin, 1.1).passed
    with pytest.raises(ValueError):
        substitution_check(cos, cos, 1.0)


def test_complex_examples():
    p = ComplexPoly([0, 1])
    assert complex_path_sum(1j, p) == pytest.approx(-0.5)
    assert path_integral(p, [0, 1 + 1j, 1j]) == pytest.approx(-0.5, abs=1e-10)
    with pytest.raises(ValueError):
        ComplexPoly([1] * 10)


def test_vector_module_examples():
    F = VecFamily([T, ONE])
    assert np.allclose(vector_module_sum(1.0, F), [0.5, 1.0], atol=1e-10)
    assert np.allclose(vector_module_sum(0.0, F), [0.0, 0.0])
    assert np.allclose(vector_module_sum(-1.0, F), [0.5, -1.0], atol=1e-10)


def test_interval_module_example():
    mod = make_interval_module(2.0)
    half_t = AnalyticFamily([("mono", 1, 0.5)])
    assert mod.lsum_op(2.0, half_t) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("kind", ["rpos", "unit", "real", "sym"])
def test_closure(kind):
    res = check_closure(make_real_adder(kind), cases=60, seed=4)
    assert res.passed, res.failures[:1]


def test_basis_oracle():
    res = check_basis_oracle(cases=80, seed=1)
    assert res.passed, res.failures[:1]


def test_substitution_suite():
    res = check_substitution(cases=40, seed=2)
    assert res.passed, res.failures[:1]


def test_path_independence_suite():
    res = check_path_independence(cases=40, seed=3)
    assert res.passed, res.failures[:1]


def test_matrix_map_is_linear():
    mod2 = make_vector_module(2)
    mod3 = make_vector_module(3, base=mod2.base)
    T32 = MatrixMap([[1.0, -2.0], [0.5, 0.0], [3.0, 1.0]])
    res = check_linear_map(T32, mod2, mod3, cases=30, seed=0)
    assert res.passed, res.failures[:1]


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(method="gauss")
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0.0)


def test_depth_exhaustion_reports_intervals():
    spec = QuadratureSpec(abs_tol=1e-14, max_depth=2)
    with pytest.raises(QuadratureError) as info:
        integrate(lambda t: np.sin(40 * t), 0.0, 3.0, spec)
    assert info.value.intervals


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")
def test_backends_give_same_integrals():
    rng = random.Random(9)
    fams = [random_basis(rng, max_mono=6, max_terms=4) for _ in range(10)]
    prev = _kernels.set_backend("numpy")
    try:
        slow = [integrate(f, -1.0, 2.0) for f in fams]
        _kernels.set_backend("numba")
        fast = [integrate(f, -1.0, 2.0) for f in fams]
    finally:
        _kernels.set_backend(prev)
    assert np.allclose(slow, fast, atol=1e-12)


@given(st.floats(-2, 2), st.floats(-2, 2), st.integers(0, 2 ** 32))
def test_integral_is_additive_over_intervals(a, b, seed):
    f = random_basis(random.Random(seed))
    whole = integrate(f, 0.0, b)
    parts = integrate(f, 0.0, a) + integrate(f, a, b)
    assert whole == pytest.approx(parts, abs=1e-7)


@given(st.integers(0, 2 ** 32), st.floats(-2, 2))
def test_quadrature_matches_closed_form(seed, x):
    f = random_basis(random.Random(seed), max_mono=6, max_terms=4)
    assert real_sum(x, f) == pytest.approx(f.exact_integral(0.0, x), abs=1e-7)
