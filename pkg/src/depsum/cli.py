"""Command-line front end.

    depsum check --instance nat --axiom all --cases 500 --seed 42
    depsum eval faulhaber --fixture deg2.txt
    depsum list

Exit status: 0 all checks passed, 1 some check failed, 2 bad arguments or
fixture, 3 an instance raised an unexpected error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import traceback
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import __version__, instances
from .core import AXIOMS, default_serialize

SCHEMA = 1
EVAL_KINDS = ("ord-sum", "faulhaber", "oplax-colim", "etale", "product")


class UsageError(Exception):
    """Bad configuration or fixture; maps to exit status 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunConfig:
    instances: list
    axioms: list | str = "all"
    cases: int = 200
    seed: int = 0
    tol: float | None = None
    format: str = "text"
    out: str | None = None
    fixtures: list = field(default_factory=list)

    def validate(self) -> None:
        if self.cases < 1:
            raise UsageError("--cases must be at least 1")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("--tol must be positive")
        for name in self.instances:
            if name not in instances.REGISTRY:
                raise UsageError(f"unknown instance {name!r}; try 'depsum list'")
        if self.axioms not in ("all", "core"):
            for name in self.instances:
                missing = [a for a in self.axioms if a not in instances.get(name).suites]
                if missing:
                    raise UsageError(f"{name} has no suite {', '.join(missing)}")

    def plan(self) -> list[tuple[str, str]]:
        out = []
        for name in self.instances:
            suites = instances.get(name).suites
            if self.axioms == "all":
                chosen = suites
            elif self.axioms == "core":
                chosen = [s for s in suites if s in AXIOMS or s == "module"]
            else:
                chosen = self.axioms
            out.extend((name, s) for s in chosen)
        return out


def _split(values, default=None) -> list:
    if not values:
        return list(default or [])
    items = []
    for v in values:
        items.extend(p.strip() for p in v.split(",") if p.strip())
    return items


def build_report(config: RunConfig, results: list) -> dict:
    return {
        "schema": SCHEMA,
        "version": __version__,
        "config": asdict(config),
        "results": results,
        "passed": all(r["passed"] for r in results),
    }


def strip_timing(report: dict) -> dict:
    """Copy of a report without wall-time fields, for reproducibility checks."""
    out = dict(report)
    out["results"] = [{k: v for k, v in r.items() if k != "wall_time"} for r in report["results"]]
    out.pop("wall_time", None)
    return out


def run_check(config: RunConfig) -> dict:
    results = []
    started = time.perf_counter()
    for name, suite in config.plan():
        t0 = time.perf_counter()
        res = instances.run_suite(name, suite, cases=config.cases, seed=config.seed, tol=config.tol)
        entry = res.to_json()
        entry["wall_time"] = round(time.perf_counter() - t0, 4)
        results.append(entry)
    report = build_report(config, results)
    report["wall_time"] = round(time.perf_counter() - started, 4)
    return report


def format_text(report: dict) -> str:
    lines = []
    for r in report["results"]:
        status = "PASS" if r["passed"] else "FAIL"
        extra = f", {r['skipped']} skipped" if r["skipped"] else ""
        lines.append(f"{r['instance']:<14} {r['axiom']:<22} {status}  "
                     f"{r['cases_run']} cases{extra}  {r['wall_time']:.2f}s")
        for note in r["notes"]:
            lines.append(f"    note: {note}")
        for fail in r["failures"][:3]:
            lines.append("    failure: " + json.dumps(fail, default=default_serialize, sort_keys=True)[:400])
    lines.append(f"overall: {'PASS' if report['passed'] else 'FAIL'}")
    return "\n".join(lines)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_check(args) -> int:
    axioms = _split(args.axiom, ["all"])
    config = RunConfig(
        instances=_split(args.instance, instances.names()),
        axioms=axioms[0] if axioms in (["all"], ["core"]) else axioms,
        cases=args.cases,
        seed=args.seed,
        tol=args.tol,
        format=args.format,
        out=args.out,
        fixtures=list(args.fixture or []),
    )
    config.validate()
    report = run_check(config)
    if config.format == "json":
        text = json.dumps(report, indent=2, sort_keys=True, default=default_serialize)
    else:
        text = format_text(report)
    _emit(text, config.out)
    return 0 if report["passed"] else 1


# fixtures for eval

def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None


def _load_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _key_lines(path: str) -> list[tuple[int, str, str]]:
    """Lines ``key: value`` with comments (#) and blank lines dropped."""
    out = []
    for no, raw in enumerate(_read(path).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise UsageError(f"{path}:{no}: expected 'key: value'")
        out.append((no, key.strip(), value.strip()))
    return out


def eval_ord_sum(path: str) -> str:
    """Fixture lines: ``alpha: <ordinal>`` then either ``const: <ordinal>``
    or one ``piece: <cut> -> <value>`` per constant piece."""
    from .ordinal import OrdinalError, StepFamily, ord_sum, parse_ordinal
    alpha, const, pieces = None, None, []
    for no, key, value in _key_lines(path):
        try:
            if key == "alpha":
                alpha = parse_ordinal(value)
            elif key == "const":
                const = parse_ordinal(value)
            elif key == "piece":
                cut, arrow, val = value.partition("->")
                if not arrow:
                    raise UsageError(f"{path}:{no}: piece needs '<cut> -> <value>'")
                pieces.append((parse_ordinal(cut), parse_ordinal(val)))
            else:
                raise UsageError(f"{path}:{no}: unknown key {key!r}")
        except OrdinalError as exc:
            raise UsageError(f"{path}:{no}: {exc}") from None
    if alpha is None:
        raise UsageError(f"{path}: missing 'alpha'")
    try:
        f = StepFamily.const(alpha, const) if const is not None else StepFamily(alpha, pieces)
    except OrdinalError as exc:
        raise UsageError(f"{path}: {exc}") from None
    return str(ord_sum(alpha, f))


def eval_faulhaber(path: str) -> str:
    """Fixture lines: ``d: <n>`` for F_d, or ``coeffs: c0 c1 ...`` for the
    family c0 + c1 X + ...; prints the summed polynomial."""
    from .arith import RationalPoly, faulhaber_poly, sum_operator
    for no, key, value in _key_lines(path):
        try:
            if key == "d":
                d = int(value)
                if d < 0:
                    raise ValueError("degree must be non-negative")
                return str(faulhaber_poly(d))
            if key == "coeffs":
                cs = [Fraction(c) for c in value.split()]
                p = sum((RationalPoly.var(0) ** k * c for k, c in enumerate(cs)), RationalPoly.const(0))
                return str(sum_operator(p))
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"{path}:{no}: {exc}") from None
        raise UsageError(f"{path}:{no}: unknown key {key!r}")
    raise UsageError(f"{path}: expected 'd' or 'coeffs'")


def _cat_family(data: dict):
    from .fincat import CatFamily, FinCat, FinFunctor, _freeze
    I = FinCat.from_json(data["index"])
    if "constant" in data:
        return I, CatFamily.constant(I, FinCat.from_json(data["constant"]))
    vals = data["values"]
    if isinstance(vals, dict):
        cats = [FinCat.from_json(vals[str(o)]) for o in I.objects]
    else:
        cats = [FinCat.from_json(v) for v in vals]
    given = {_freeze(e["morphism"]): e for e in data.get("functors", [])}
    functors = []
    for k, m in enumerate(I.mor_ids):
        src, tgt = cats[I.src[k]], cats[I.tgt[k]]
        if m not in given:
            if k not in I.ident:
                raise UsageError(f"no functor given for morphism {m!r}")
            functors.append(FinFunctor.identity(src))
            continue
        e = given[m]
        functors.append(FinFunctor.from_labels(src, tgt, {_freeze(a): _freeze(b) for a, b in e["objects"]},
                                               {_freeze(a): _freeze(b) for a, b in e["morphisms"]}))
    return I, CatFamily(I, cats, functors)


def eval_oplax_colim(path: str) -> dict:
    """Fixture JSON: {"index": cat, "constant": cat} or {"index": cat,
    "values": [cat, ...], "functors": [{"morphism", "objects", "morphisms"}]};
    "variant": "lax" selects the lax colimit."""
    from .fincat import CategoryError, lax_colim, oplax_colim
    data = _load_json(path)
    try:
        I, F = _cat_family(data)
        lax = data.get("variant", "oplax") == "lax"
        return (lax_colim(I, F) if lax else oplax_colim(I, F)).cat.to_json()
    except (CategoryError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def eval_etale(path: str) -> dict:
    """Fixture JSON: a presheaf (with its space), or {"space": ..} alone for
    the constant singleton presheaf."""
    from .fintop import Presheaf, FinTop, TopologyError, etale
    data = _load_json(path)
    try:
        F = Presheaf.from_json(data) if "sections" in data else \
            Presheaf.constant(FinTop.from_json(data["space"]), ("*",))
        E = etale(F)
    except (TopologyError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    return E.space.to_json()


def _parse_elem(name: str, text: str):
    if name == "ord":
        from .ordinal import parse_ordinal
        return parse_ordinal(text)
    if name in ("nat", "card", "int", "f1"):
        return int(text)
    if name.startswith("zq"):
        from .padic import PadicInt, parse_padic
        return parse_padic(text) if "base" in text else PadicInt(int(name[2:]), int(text), 24)
    if name in ("rpos", "unit", "real", "sym"):
        return float(text)
    if name == "cpoly":
        return complex(text.replace(" ", ""))
    raise UsageError(f"product is not available for {name!r}")


def eval_product(path: str) -> str:
    """Fixture lines: ``instance: <name>``, ``x: <elem>``, ``y: <elem>``;
    prints x . y, the sum over y of the constant family x."""
    from .derived import product
    fields = {}
    for no, key, value in _key_lines(path):
        if key not in ("instance", "x", "y"):
            raise UsageError(f"{path}:{no}: unknown key {key!r}")
        fields[key] = (no, value)
    for key in ("instance", "x", "y"):
        if key not in fields:
            raise UsageError(f"{path}: missing {key!r}")
    name = fields["instance"][1]
    if name not in instances.REGISTRY or instances.get(name).kind != "adder":
        raise UsageError(f"{path}:{fields['instance'][0]}: {name!r} is not an adder")
    vals = {}
    for key in ("x", "y"):
        no, text = fields[key]
        try:
            vals[key] = _parse_elem(name, text)
        except ValueError as exc:
            raise UsageError(f"{path}:{no}: {exc}") from None
    adder = instances.get(name).build()
    return str(product(adder, vals["x"], vals["y"]))


_EVALS = {
    "ord-sum": eval_ord_sum,
    "faulhaber": eval_faulhaber,
    "oplax-colim": eval_oplax_colim,
    "etale": eval_etale,
    "product": eval_product,
}


def cmd_eval(args) -> int:
    if not args.fixture:
        raise UsageError("eval needs --fixture")
    value = _EVALS[args.kind](args.fixture[0])
    if isinstance(value, str) and args.format == "text":
        text = value
    else:
        text = json.dumps({"schema": SCHEMA, "kind": args.kind, "value": value} if args.format == "json"
                          else value, indent=2, sort_keys=True, default=default_serialize)
    _emit(text, args.out)
    return 0


def cmd_list(args) -> int:
    rows = [instances.describe(n) for n in instances.names()]
    if args.format == "json":
        text = json.dumps({"schema": SCHEMA, "axioms": list(AXIOMS), "instances": rows}, indent=2, sort_keys=True)
    else:
        lines = ["axioms: " + ", ".join(AXIOMS), ""]
        for r in rows:
            if r["kind"] == "adder":
                flags = ("commutative" if r["commutative"] else "non-commutative") + \
                        (", zero object" if r["zero"] else ", no zero object")
            else:
                flags = f"{r['kind']} over {r['base']}"
            lines.append(f"{r['name']:<14} {flags}")
            lines.append(f"{'':<14} suites: {', '.join(r['suites'])}")
        text = "\n".join(lines)
    _emit(text, args.out)
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="depsum", description="Check dependent-sum axioms on concrete instances.")
    p.add_argument("--version", action="version", version=f"depsum {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--out", help="write the report here instead of standard output")

    c = sub.add_parser("check", help="run axiom suites")
    c.add_argument("--instance", action="append", help="instance name(s), comma separated; default all")
    c.add_argument("--axiom", action="append",
                   help="suite name(s), comma separated, 'core' for the common axioms, or 'all' (default)")
    c.add_argument("--cases", type=int, default=200)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", type=float, default=None,
                   help="tolerance for approximate instances (each has its own default)")
    c.add_argument("--fixture", action="append")
    common(c)
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("eval", help="compute one value from a fixture")
    e.add_argument("kind", choices=EVAL_KINDS)
    e.add_argument("--fixture", action="append")
    common(e)
    e.set_defaults(func=cmd_eval)

    ls = sub.add_parser("list", help="list instances and their suites")
    common(ls)
    ls.set_defaults(func=cmd_list)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"depsum: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:   # --help and --version
        return exc.code if isinstance(exc.code, int) else 0
    except Exception:
        print("depsum: internal error", file=sys.stderr)
        traceback.print_exc()
        return 3


if __name__ == "__main__":
    sys.exit(main())
