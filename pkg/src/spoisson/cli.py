"""``spoisson`` command line: analyze, verify, census, identity.

Exit codes: 0 success, 1 assertion failure, 2 usage or parse error, 3 resource budget.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from . import __version__
from .errors import BudgetExceeded, ResourceBudgetError, SpoissonError
from .identities import DEFAULT_EVAL_BUDGET, catalog, satisfies_multilinear
from .liealg import FAMILIES, LieAlgebra, SeriesReport, lower_central_series, make_named
from .poisson import DEFAULT_BUDGET, PoissonRing, degree_truncated_symmetric, truncated_hamiltonian, truncated_symmetric
from .series import SERIES_KINDS, class_summary, dimension_subalgebras, predicted_class_bounds, series
from .suites import ALIASES, SUITES, run_suite

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
CENSUS_HEADER = ("family", "params", "p", "dim", "strong_class", "lie_class", "solv_len", "strong_solv_len",
                 "formula", "lower_bound", "status")


class SpecError(ValueError):
    """Malformed algebra description."""


def _strict(d: Mapping, allowed: set, where: str, required: Sequence[str] = ()):
    if not isinstance(d, Mapping):
        raise SpecError(f"{where}: expected an object")
    extra = set(d) - allowed
    if extra:
        raise SpecError(f"{where}: unknown field(s) {sorted(extra)}")
    missing = [k for k in required if k not in d]
    if missing:
        raise SpecError(f"{where}: missing field(s) {missing}")


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SpecError(f"{where}: expected an integer, got {v!r}")
    return v


@dataclass(frozen=True)
class AlgebraSpec:
    """A ring to build: a named family or explicit Lie structure constants, plus a construction.

    ``construct`` is ``("s",)``, ``("S_degree", D)`` or ``("hamiltonian", m)``.
    """

    p: int
    construct: tuple
    family: str | None = None
    params: tuple = ()
    dim: int | None = None
    labels: tuple | None = None
    brackets: tuple = ()
    budget: int = DEFAULT_BUDGET

    TOP_KEYS = {"schema", "family", "params", "p", "type", "dim", "labels", "brackets", "construct", "budget"}

    @classmethod
    def from_dict(cls, d: Mapping) -> "AlgebraSpec":
        _strict(d, cls.TOP_KEYS, "algebra", ["p"])
        if "schema" in d and d["schema"] != SCHEMA:
            raise SpecError(f"unsupported schema {d['schema']!r}; expected {SCHEMA}")
        p = _int(d["p"], "p")
        budget = _int(d.get("budget", DEFAULT_BUDGET), "budget")
        construct = cls._construct(d.get("construct"), d.get("family"), d.get("params"))
        if construct[0] == "hamiltonian":
            if "type" in d or "brackets" in d or "dim" in d:
                raise SpecError("hamiltonian rings take no Lie structure constants")
            return cls(p, construct, family="hamiltonian", params=(("m", construct[1]),), budget=budget)
        if "family" in d:
            if "type" in d or "brackets" in d or "dim" in d or "labels" in d:
                raise SpecError("give either a family or explicit structure constants, not both")
            params = d.get("params", {})
            _strict(params, set(params) if isinstance(params, Mapping) else set(), "params")
            return cls(p, construct, family=str(d["family"]),
                       params=tuple(sorted((str(k), _int(v, f"params.{k}")) for k, v in params.items())),
                       budget=budget)
        if d.get("type") != "lie":
            raise SpecError("need either 'family' or 'type': 'lie'")
        dim = _int(d.get("dim"), "dim")
        labels = d.get("labels")
        if labels is not None and (not isinstance(labels, list) or not all(isinstance(x, str) for x in labels)):
            raise SpecError("labels must be a list of strings")
        brackets = []
        seen = set()
        for n, entry in enumerate(d.get("brackets", [])):
            _strict(entry, {"i", "j", "value"}, f"brackets[{n}]", ["i", "j", "value"])
            value = []
            for m, term in enumerate(entry["value"]):
                _strict(term, {"k", "c"}, f"brackets[{n}].value[{m}]", ["k", "c"])
                value.append((_int(term["k"], "k"), _int(term["c"], "c")))
            if len({k for k, _ in value}) != len(value):
                raise SpecError(f"brackets[{n}] lists an output index twice")
            i, j = _int(entry["i"], "i"), _int(entry["j"], "j")
            if (min(i, j), max(i, j)) in seen:
                raise SpecError(f"brackets[{n}]: pair ({i}, {j}) given twice")
            seen.add((min(i, j), max(i, j)))
            brackets.append((i, j, tuple(value)))
        return cls(p, construct, dim=dim, labels=tuple(labels) if labels is not None else None,
                   brackets=tuple(brackets), budget=budget)

    @staticmethod
    def _construct(c, family, params) -> tuple:
        if family == "hamiltonian":
            if c is not None and (not isinstance(c, Mapping) or c.get("kind") != "hamiltonian"):
                raise SpecError("family 'hamiltonian' only supports the hamiltonian construction")
            if not isinstance(params, Mapping):
                raise SpecError("hamiltonian needs params {'m': ...}")
            _strict(params, {"m"}, "params", ["m"])
            return ("hamiltonian", _int(params["m"], "params.m"))
        if c is None:
            return ("s",)
        if not isinstance(c, Mapping) or "kind" not in c:
            raise SpecError("construct must be an object with a 'kind'")
        kind = c["kind"]
        if kind == "s":
            _strict(c, {"kind"}, "construct")
            return ("s",)
        if kind == "S_degree":
            _strict(c, {"kind", "D"}, "construct", ["D"])
            return ("S_degree", _int(c["D"], "construct.D"))
        if kind == "hamiltonian":
            _strict(c, {"kind", "m"}, "construct", ["m"])
            return ("hamiltonian", _int(c["m"], "construct.m"))
        raise SpecError(f"unknown construction {kind!r}")

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"schema": SCHEMA, "p": self.p}
        if self.construct[0] == "hamiltonian":
            d.update(family="hamiltonian", params={"m": self.construct[1]})
        elif self.family is not None:
            d.update(family=self.family, params=dict(self.params))
        else:
            d.update(type="lie", dim=self.dim,
                     brackets=[{"i": i, "j": j, "value": [{"k": k, "c": c} for k, c in v]}
                               for i, j, v in self.brackets])
            if self.labels is not None:
                d["labels"] = list(self.labels)
        if self.construct[0] == "s":
            d["construct"] = {"kind": "s"}
        elif self.construct[0] == "S_degree":
            d["construct"] = {"kind": "S_degree", "D": self.construct[1]}
        if self.budget != DEFAULT_BUDGET:
            d["budget"] = self.budget
        return d

    def lie_algebra(self) -> LieAlgebra | None:
        if self.construct[0] == "hamiltonian":
            return None
        if self.family is not None:
            return make_named(self.family, dict(self.params), self.p)
        table = {(i, j): dict(v) for i, j, v in self.brackets}
        return LieAlgebra(self.p, self.dim, table, self.labels, name="custom")

    def build(self) -> PoissonRing:
        kind = self.construct[0]
        if kind == "hamiltonian":
            return truncated_hamiltonian(self.construct[1], self.p, budget=self.budget)
        L = self.lie_algebra()
        if kind == "s":
            return truncated_symmetric(L, budget=self.budget)
        return degree_truncated_symmetric(L, self.construct[1], budget=self.budget)


@dataclass(frozen=True)
class AnalysisReport:
    algebra: dict
    ring: dict
    series: dict
    verdicts: dict
    formula: dict | None
    dimension_subalgebras: list | None
    engine: str = f"spoisson {__version__}"
    schema: int = SCHEMA
    timing: dict = field(default_factory=dict, compare=False)

    KEYS = {"schema", "engine", "algebra", "ring", "series", "verdicts", "formula", "dimension_subalgebras", "timing"}

    def to_dict(self) -> dict:
        return {"schema": self.schema, "engine": self.engine, "algebra": self.algebra, "ring": self.ring,
                "series": {k: v.to_dict() for k, v in self.series.items()}, "verdicts": self.verdicts,
                "formula": self.formula, "dimension_subalgebras": self.dimension_subalgebras,
                "timing": self.timing}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: Mapping) -> "AnalysisReport":
        _strict(d, cls.KEYS, "report", sorted(cls.KEYS - {"timing"}))
        if d["schema"] != SCHEMA:
            raise SpecError(f"unsupported schema {d['schema']!r}")
        rep_keys = {"kind", "dims", "verdict", "class_or_length"}
        for k, v in d["series"].items():
            _strict(v, rep_keys, f"series.{k}", sorted(rep_keys))
        return cls(algebra=dict(d["algebra"]), ring=dict(d["ring"]),
                   series={k: SeriesReport.from_dict(v) for k, v in d["series"].items()},
                   verdicts=dict(d["verdicts"]), formula=d["formula"],
                   dimension_subalgebras=d["dimension_subalgebras"], engine=d["engine"], schema=d["schema"],
                   timing=dict(d.get("timing", {})))

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def analyze(spec: AlgebraSpec) -> AnalysisReport:
    t0 = time.perf_counter()
    R = spec.build()
    reps = {kind: series(R, kind) for kind in SERIES_KINDS}
    formula = dims = None
    L = R.origin
    if L is not None and spec.construct[0] == "s":
        if lower_central_series(L).terminates:
            strong, lower = predicted_class_bounds(L)
            formula = {"strong_class": strong, "lower_bound": lower}
        dims = [{"n": d.n, "dim": d.dim, "gamma_dim": d.gamma_dim, "equal": d.equal}
                for d in dimension_subalgebras(R)]
    return AnalysisReport(algebra=spec.to_dict(), ring=R.describe(), series=reps, verdicts=class_summary(R),
                          formula=formula, dimension_subalgebras=dims,
                          timing={"wall_seconds": round(time.perf_counter() - t0, 6)})


# -- census ------------------------------------------------------------------

def parse_int_list(text: str) -> list[int]:
    """``"3"``, ``"2,3,5"`` or ``"1..4"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise SpecError(f"empty integer list {text!r}")
    return out


def _fmt(v) -> str:
    return "" if v is None else str(v)


def census_cell(family: str, params: tuple, p: int, budget: int) -> dict:
    """One census row. Over-budget cells come back with status ``skipped``."""
    row: dict[str, Any] = {"family": family, "params": ";".join(f"{k}={v}" for k, v in params) or "-", "p": p}
    spec = AlgebraSpec(p, ("hamiltonian", dict(params)["m"]) if family == "hamiltonian" else ("s",),
                       family=family, params=params, budget=budget)
    try:
        R = spec.build()
    except ResourceBudgetError:
        row.update(dim=None, strong_class=None, lie_class=None, solv_len=None, strong_solv_len=None,
                   formula=None, lower_bound=None, status="skipped")
        return row
    v = class_summary(R)
    row.update(dim=R.dim, strong_class=v["strong_class"], lie_class=v["lie_class"], solv_len=v["solvable_length"],
               strong_solv_len=v["strong_solvable_length"], formula=None, lower_bound=None)
    ok = True
    L = R.origin
    if L is not None:
        if lower_central_series(L).terminates:
            strong, lower = predicted_class_bounds(L)
            row.update(formula=strong, lower_bound=lower)
            lie_c = v["lie_class"]
            ok = (v["strong_class"] == strong and lie_c is not None and lie_c <= strong
                  and (lower is None or lower <= lie_c) and (p <= 3 or lie_c == strong))
        else:
            ok = not v["lie_nilpotent"]
    row["status"] = "ok" if ok else "bounds_fail"
    return row


def census_rows(family: str, grid: Mapping[str, list[int]], primes: Sequence[int], budget: int,
                workers: int = 1) -> list[dict]:
    names = sorted(grid)
    cells = [(family, tuple(zip(names, combo)), p)
             for combo in itertools.product(*(grid[n] for n in names)) for p in primes]
    args = [(f, pa, p, budget) for f, pa, p in cells]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_cell_star, args))
    return [census_cell(*a) for a in args]


def _cell_star(a):
    return census_cell(*a)


def render_census(rows: list[dict], fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "csv":
        buf.write(f"# spoisson {__version__} census schema {SCHEMA}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CENSUS_HEADER)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in CENSUS_HEADER])
    else:
        buf.write(json.dumps({"schema": SCHEMA, "engine": f"spoisson {__version__}", "census": True}) + "\n")
        for r in rows:
            buf.write(json.dumps({k: r[k] for k in CENSUS_HEADER}, sort_keys=False) + "\n")
    return buf.getvalue()


# -- argument parsing -----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_algebra_flags(ap: argparse.ArgumentParser):
    ap.add_argument("--spec", help="algebra description (JSON file)")
    ap.add_argument("--family", help=f"one of {', '.join(sorted(FAMILIES))}, hamiltonian")
    for name in ("m", "n", "k"):
        ap.add_argument(f"--{name}", type=int)
    ap.add_argument("--p", type=int)
    ap.add_argument("--construct", choices=("s", "S_degree", "hamiltonian"))
    ap.add_argument("--D", type=int, help="degree cap for --construct S_degree")
    ap.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="basis-monomial cap (default 5000)")


def spec_from_args(args) -> AlgebraSpec:
    if args.spec:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SpecError(f"cannot read {args.spec}: {exc}") from exc
        if args.budget != DEFAULT_BUDGET:
            d = {**d, "budget": args.budget}
        return AlgebraSpec.from_dict(d)
    if not args.family or args.p is None:
        raise SpecError("give --spec FILE or --family and --p")
    d: dict[str, Any] = {"schema": SCHEMA, "family": args.family, "p": args.p, "budget": args.budget}
    params = {k: getattr(args, k) for k in ("m", "n", "k") if getattr(args, k) is not None}
    d["params"] = params
    if args.family != "hamiltonian":
        if args.construct in (None, "s"):
            d["construct"] = {"kind": "s"}
        elif args.construct == "S_degree":
            if args.D is None:
                raise SpecError("--construct S_degree needs --D")
            d["construct"] = {"kind": "S_degree", "D": args.D}
        else:
            raise SpecError("--construct hamiltonian needs --family hamiltonian --m M")
    return AlgebraSpec.from_dict(d)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="spoisson", description="Series, class formulas and identities of truncated Poisson algebras")
    ap.add_argument("--version", action="version", version=f"spoisson {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="series report for one ring (JSON on stdout)")
    _add_algebra_flags(a)

    v = sub.add_parser("verify", help="run a named verification suite")
    v.add_argument("suite", nargs="?", help=f"one of {', '.join(SUITES)} or 'all'")
    v.add_argument("--json", action="store_true", help="print the full JSON report")
    v.add_argument("--list", action="store_true", help="list suites and exit")

    c = sub.add_parser("census", help="parameter sweep over a family, one row per cell")
    c.add_argument("--family", required=True)
    for name in ("m", "n", "k"):
        c.add_argument(f"--{name}", help="value list, e.g. 3,4 or 1..3")
    c.add_argument("--p", required=True, help="prime list, e.g. 2,3,5")
    c.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    c.add_argument("--out", help="output path (default stdout)")
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    c.add_argument("--workers", type=int, default=1)

    i = sub.add_parser("identity", help="check a catalog polynomial on one ring")
    i.add_argument("poly", help="st2, st4, nilp<s>, snilp<s>, solv<s>, ssolv<s>")
    _add_algebra_flags(i)
    i.add_argument("--mode", choices=("exhaustive", "sample"), default="exhaustive")
    i.add_argument("--seed", type=int)
    i.add_argument("--samples", type=int, default=1000)
    i.add_argument("--eval-budget", type=int, default=DEFAULT_EVAL_BUDGET)
    i.add_argument("--expect", choices=("satisfied", "counterexample"),
                   help="exit 1 unless the verdict matches")
    return ap


def _cmd_analyze(args) -> int:
    report = analyze(spec_from_args(args))
    print(report.to_json())
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.list or not args.suite:
        for name in SUITES:
            print(name)
        return EXIT_OK if args.list else EXIT_USAGE
    names = list(SUITES) if args.suite == "all" else [ALIASES.get(args.suite, args.suite)]
    for name in names:
        if name not in SUITES:
            print(f"unknown suite {args.suite!r}; known: {', '.join(SUITES)}", file=sys.stderr)
            return EXIT_USAGE
    status = EXIT_OK
    payload = []
    for name in names:
        rep = run_suite(name)
        payload.append(rep.to_dict())
        if not args.json:
            verdict = "PASS" if rep.ok else "FAIL"
            print(f"{name}: {verdict} ({sum(c.holds for c in rep.checks)}/{len(rep.checks)} checks)")
            bad = rep.first_failure()
            if bad is not None:
                print("first failure: " + json.dumps(bad.to_dict(), sort_keys=True, ensure_ascii=False))
        if not rep.ok:
            status = EXIT_FAIL
    if args.json:
        print(json.dumps({"schema": SCHEMA, "engine": f"spoisson {__version__}", "suites": payload},
                         indent=2, sort_keys=True, ensure_ascii=False))
    return status


def _cmd_census(args) -> int:
    if args.family != "hamiltonian" and args.family not in FAMILIES:
        raise SpecError(f"unknown family {args.family!r}")
    primes = parse_int_list(args.p)
    if args.family == "hamiltonian":
        names = ("m",)
    else:
        names = FAMILIES[args.family][0]
    grid = {}
    for name in names:
        raw = getattr(args, name, None)
        if raw is None:
            raise SpecError(f"family {args.family} needs --{name}")
        grid[name] = parse_int_list(raw)
    extra = [n for n in ("m", "n", "k") if n not in names and getattr(args, n, None) is not None]
    if extra:
        raise SpecError(f"family {args.family} does not take --{extra[0]}")
    rows = census_rows(args.family, grid, primes, args.budget, args.workers)
    text = render_census(rows, args.format)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_identity(args) -> int:
    try:
        poly = catalog(args.poly)
    except KeyError as exc:
        raise SpecError(str(exc.args[0])) from exc
    if args.mode == "sample" and args.seed is None:
        raise SpecError("sampling mode needs --seed")
    spec = spec_from_args(args)
    R = spec.build()
    verdict = satisfies_multilinear(R, poly, args.eval_budget, mode=args.mode, seed=args.seed,
                                    samples=args.samples)
    out = {"schema": SCHEMA, "engine": f"spoisson {__version__}", "algebra": spec.to_dict(),
           "polynomial": str(poly), **verdict.to_dict()}
    print(json.dumps(out, indent=2, sort_keys=True, ensure_ascii=False))
    if args.expect and args.expect != ("satisfied" if verdict.satisfied else verdict.status):
        return EXIT_FAIL
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"analyze": _cmd_analyze, "verify": _cmd_verify, "census": _cmd_census, "identity": _cmd_identity}
    try:
        return handlers[args.command](args)
    except (ResourceBudgetError, BudgetExceeded) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (SpecError, SpoissonError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
