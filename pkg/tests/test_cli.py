import json
from pathlib import Path

import pytest

from depsum import __version__
from depsum.cli import main, strip_timing

FIX = Path(__file__).parent / "fixtures"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0 and __version__ in out


def test_unknown_instance_is_usage_error(capsys):
    code, _, err = run(capsys, "check", "--instance", "nosuch")
    assert code == 2 and "unknown instance" in err


def test_unknown_suite_is_usage_error(capsys):
    code, _, err = run(capsys, "check", "--instance", "nat", "--axiom", "closure")
    assert code == 2


def test_bad_cases_is_usage_error(capsys):
    assert run(capsys, "check", "--instance", "nat", "--cases", "0")[0] == 2


def test_missing_subcommand(capsys):
    assert run(capsys)[0] == 2


def test_check_passes_with_json_schema(capsys):
    code, out, _ = run(capsys, "check", "--instance", "nat,int", "--axiom", "core", "--cases", "50",
                       "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["schema"] == 1 and report["passed"] is True
    assert {r["instance"] for r in report["results"]} == {"nat", "int"}
    for r in report["results"]:
        assert {"axiom", "instance", "cases_run", "failures", "skipped", "passed", "wall_time"} <= set(r)


def test_ord_fubini_reports_counterexample(capsys):
    code, out, _ = run(capsys, "check", "--instance", "ord", "--axiom", "fubini", "--cases", "50")
    assert code == 0
    assert "counterexample" in out and "w*2" in out


def test_determinism(capsys, tmp_path):
    reports = []
    path = tmp_path / "report.json"
    for _ in range(2):
        code, _, _ = run(capsys, "check", "--instance", "nat,ord,zq3,real", "--axiom", "core", "--cases", "40",
                         "--seed", "11", "--format", "json", "--out", str(path))
        assert code == 0
        reports.append(strip_timing(json.loads(path.read_text())))
    assert reports[0] == reports[1]


def test_list_text_and_json(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0
    ord_line = next(line for line in out.splitlines() if line.startswith("ord "))
    assert "non-commutative" in ord_line
    code, out, _ = run(capsys, "list", "--format", "json")
    data = json.loads(out)
    names = [r["name"] for r in data["instances"]]
    assert names == sorted(names) and "faulhaber" in names
    code2, out2, _ = run(capsys, "list", "--format", "json")
    assert out == out2


def test_eval_faulhaber(capsys):
    code, out, _ = run(capsys, "eval", "faulhaber", "--fixture", str(FIX / "faulhaber_d2.txt"))
    assert code == 0 and out.strip() == "(2*X^3 + 3*X^2 + X)/6"


@pytest.mark.parametrize("fixture,want", [("ord_const_w_over_2.txt", "w*2"), ("ord_steps.txt", "w*2")])
def test_eval_ord_sum(capsys, fixture, want):
    code, out, _ = run(capsys, "eval", "ord-sum", "--fixture", str(FIX / fixture))
    assert code == 0 and out.strip() == want


@pytest.mark.parametrize("fixture,want", [("product_2_w.txt", "w"), ("product_w_2.txt", "w*2")])
def test_eval_product(capsys, fixture, want):
    code, out, _ = run(capsys, "eval", "product", "--fixture", str(FIX / fixture))
    assert code == 0 and out.strip() == want


def test_eval_oplax(capsys):
    code, out, _ = run(capsys, "eval", "oplax-colim", "--fixture", str(FIX / "discrete_2_3.json"), "--format", "json")
    assert code == 0
    value = json.loads(out)["value"]
    assert len(value["objects"]) == 5 and len(value["morphisms"]) == 5


def test_eval_etale(capsys):
    code, out, _ = run(capsys, "eval", "etale", "--fixture", str(FIX / "sierpinski_presheaf.json"))
    assert code == 0
    assert len(json.loads(out)["points"]) == 3


def test_eval_bad_fixture(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    code, _, err = run(capsys, "eval", "etale", "--fixture", str(bad))
    assert code == 2 and "bad.json" in err
    code, _, err = run(capsys, "eval", "faulhaber", "--fixture", str(tmp_path / "missing.txt"))
    assert code == 2


def test_out_writes_file(capsys, tmp_path):
    path = tmp_path / "list.txt"
    code, out, _ = run(capsys, "list", "--out", str(path))
    assert code == 0 and out == "" and "faulhaber" in path.read_text()


def test_failing_check_exits_one(capsys, monkeypatch):
    from depsum import instances
    from depsum.core import CheckResult

    def fake(name, suite, **kw):
        res = CheckResult(suite, name)
        res.cases_run = 1
        res.failures.append({"inputs": {}, "lhs": 1, "rhs": 2})
        return res
    monkeypatch.setattr(instances, "run_suite", fake)
    code, out, _ = run(capsys, "check", "--instance", "nat", "--axiom", "zero")
    assert code == 1 and "FAIL" in out
