import dataclasses
import json
import random

import pytest

from depsum.core import (
    CheckResult,
    EqualityNotion,
    FiberDescriptor,
    Skip,
    case_rng,
    check_flatten_assoc,
    check_fubini,
    check_left_unit,
    check_right_unit,
    check_sum_assoc,
    check_zero,
    default_serialize,
    drive_cases,
    failure_record,
    max_size,
)
from depsum.discrete import make_f1_adder, make_nat_adder, nat_flatten, nat_sum, table_family
from depsum.ordinal import W, StepFamily, make_ord_adder, ord_sum


def broken_nat():
    """Naturals whose sums are off by one for x >= 2."""
    nat = make_nat_adder()
    return dataclasses.replace(nat, name="broken", sum_op=lambda x, f: nat_sum(x, f) + (x >= 2),
                               boxtimes_op=None)


def test_right_unit_examples():
    nat = make_nat_adder()
    assert nat.sum_op(5, nat.const_family(5, 1)) == 5
    assert nat.sum_op(nat.unit_elem, nat.const_family(1, 1)) == 1
    assert check_right_unit(nat, cases=50).passed


def test_left_unit_example():
    nat = make_nat_adder()
    f = table_family([4, 5, 6])
    one = nat.const_family(3, 1)
    box = nat.boxtimes(3, one, f)
    assert [box(i) for i in (1, 2, 3)] == [4, 5, 6]
    assert check_left_unit(make_f1_adder(), cases=20).passed


def test_sum_assoc_example():
    nat = make_nat_adder()
    f, g = table_family([2, 1]), table_family([1, 1, 1])
    assert nat.sum_op(3, g) == 3
    assert nat.sum_op(2, nat.boxtimes(2, f, g)) == 3


def test_flatten_assoc_example():
    # ((2, 1), 1): the first point over the second outer index
    f, g = table_family([1, 2]), table_family([1, 1, 1])
    inner = nat_flatten(2, f, 2, 1)
    assert inner == 2
    assert nat_flatten(3, g, inner, 1) == 2


def test_fubini_example_brute_force():
    nat = make_nat_adder()
    x, y = 2, 3
    dom = FiberDescriptor("product", components=(FiberDescriptor.finite((1, 2, 3)), FiberDescriptor.finite((1, 2))))
    from depsum.core import Family
    F = Family(dom, lambda p: p[0] * p[1])
    a = nat.sum_op(y, nat.partial_sum(x, y, F, "x"))
    b = nat.sum_op(x, nat.partial_sum(x, y, F, "y"))
    assert a == b == 18


def test_zero_examples():
    nat = make_nat_adder()
    assert nat.sum_op(4, nat.const_family(4, 0)) == 0
    assert nat.sum_op(0, table_family([])) == 0
    assert ord_sum(W, StepFamily.const(W, 0)).is_zero()
    assert check_zero(nat, cases=20).passed


def test_checks_detect_broken_adder():
    bad = broken_nat()
    assert not check_right_unit(bad, cases=100).passed
    assert not check_sum_assoc(bad, cases=100).passed


def test_failure_reproduces_with_same_seed():
    bad = broken_nat()
    first = check_right_unit(bad, cases=100, seed=5)
    again = check_right_unit(bad, cases=100, seed=5)
    assert first.failures and first.to_json() == again.to_json()
    fail = first.failures[0]
    x = fail["inputs"]["x"]
    assert bad.sum_op(x, bad.const_family(x, 1)) == fail["lhs"]


def test_different_seeds_draw_different_cases():
    a = [case_rng(0, "nat", "sum_assoc", k).random() for k in range(5)]
    b = [case_rng(1, "nat", "sum_assoc", k).random() for k in range(5)]
    assert a != b
    assert a == [case_rng(0, "nat", "sum_assoc", k).random() for k in range(5)]


def test_check_result_semantics():
    res = CheckResult("sum_assoc", "nat", cases_run=3)
    assert res.passed
    res.failures.append({"x": 1})
    assert not res.passed
    data = res.to_json()
    assert json.loads(json.dumps(data)) == data
    assert "FAIL" in str(res)


def test_skip_is_counted_and_partial_flagged():
    nat = make_nat_adder()

    def always_skip(rng):
        raise Skip("nothing to do")
    res = drive_cases("demo", nat, 5, 0, always_skip)
    assert res.cases_run == 0 and res.skipped > 0 and res.partial
    assert res.passed


def test_fubini_counterexample_mode_on_ord():
    res = check_fubini(make_ord_adder(), cases=50)
    assert res.passed
    assert any("counterexample" in n for n in res.notes)


def test_flatten_assoc_passes_on_nat():
    assert check_flatten_assoc(make_nat_adder(), cases=100).passed


def test_equality_notions():
    assert EqualityNotion.exact().eq(3, 3)
    eps = EqualityNotion.epsilon(1e-6)
    assert eps.eq(1.0, 1.0 + 1e-8)
    assert not eps.eq(1.0, 1.001)
    assert not eps.eq(float("nan"), float("nan"))
    with pytest.raises(ValueError):
        EqualityNotion.epsilon(0.0)
    with pytest.raises(ValueError):
        EqualityNotion("fuzzy")


def test_fiber_descriptor_validation():
    with pytest.raises(ValueError):
        FiberDescriptor.finite([1, 1])
    with pytest.raises(ValueError):
        FiberDescriptor("interval", lo=2.0, hi=1.0)
    with pytest.raises(ValueError):
        FiberDescriptor("cloud")
    empty = FiberDescriptor.finite(())
    assert empty.check_points(random.Random(0)) == []
    with pytest.raises(Skip):
        empty.sample(random.Random(0))
    iv = FiberDescriptor("interval", lo=0.0, hi=1.0)
    pts = iv.check_points(random.Random(0))
    assert len(pts) == 35 and pts[0] == 0.0 and pts[-1] == 1.0


def test_max_size_env(monkeypatch):
    monkeypatch.delenv("DEPSUM_MAX_SIZE", raising=False)
    assert max_size(6) == 6
    monkeypatch.setenv("DEPSUM_MAX_SIZE", "3")
    assert max_size(6) == 3
    monkeypatch.setenv("DEPSUM_MAX_SIZE", "lots")
    with pytest.raises(ValueError):
        max_size(6)


def test_failure_record_serializes():
    nat = make_nat_adder()
    rec = failure_record(nat, {"f": table_family([1, 2])}, 3, 4)
    assert json.loads(json.dumps(rec, default=default_serialize)) == rec
