"""Command-line front end: loads measure-spec files, runs named scenarios,
and emits machine-readable reports.

Reports are reproducible: identical inputs give byte-identical JSON (the
wall-clock runtime is reported on the text channel only).  Exit codes:
0 success, 1 when an --expect assertion fails, 2 for usage or I/O errors.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

from . import catalog, specfile
from .exactnum import DomainError, ExtMass
from .goodness import (
    NotFound,
    ValuationCertificate,
    Verdict,
    carve,
    check_valuation_certificate,
    compactified_value_sample,
    decide_bratteli_good,
    decide_compactification_good,
    find_nongood_witness,
    goodness_verdict,
)
from .homeo import back_and_forth, gamma_compactification, homeo_criterion
from .space import (
    BudgetError,
    CellId,
    CompactificationSpec,
    CompactOpen,
    IndexClass,
    MeasureSpec,
    mass_of,
    one_point_compactification,
)
from .values import ValueSample, enumerate_values, good_value_set, value_group

F = Fraction

REPORT_SCHEMA_VERSION = 1
DEFAULT_DEPTH = 6
DEFAULT_HORIZON = 8
DEFAULT_BUDGET = 10**7


class UsageError(ValueError):
    pass


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as err:
        raise UsageError(f"not a rational: {text!r}") from err


def parse_region(text: str) -> CompactOpen:
    try:
        return CompactOpen(
            tuple(CellId.parse(part) for part in text.split(",") if part)
        )
    except (ValueError, DomainError) as err:
        raise UsageError(f"bad region {text!r}: {err}") from err


def _rat(x: Fraction) -> str:
    return str(x)


def _mass(x: ExtMass) -> str:
    return str(x)


def _region_json(region: Optional[CompactOpen]) -> Optional[list[str]]:
    if region is None:
        return None
    return [str(c) for c in region.cells]


def _certificate_json(cert: ValuationCertificate) -> dict:
    return {
        "q": cert.q,
        "region": _region_json(cert.region),
        "threshold": cert.threshold,
        "target": _rat(cert.target),
    }


def _verdict_json(label: str, verdict: Verdict) -> dict:
    out: dict[str, Any] = {"label": label, "kind": verdict.kind}
    if verdict.reason:
        out["reason"] = verdict.reason
    if verdict.target is not None:
        out["target"] = _rat(verdict.target)
    if verdict.region is not None:
        out["region"] = _region_json(verdict.region)
    if verdict.certificate is not None:
        out["certificate"] = _certificate_json(verdict.certificate)
    if verdict.depth is not None:
        out["depth"] = verdict.depth
    if verdict.new_values:
        out["new_values"] = [_rat(v) for v in verdict.new_values]
    return out


def _sample_json(sample: ValueSample) -> dict:
    return {
        "values": [_rat(v) for v in sample.values],
        "depth": sample.depth,
        "piece_horizon": sample.piece_horizon,
        "bound": _mass(sample.bound),
    }


def spec_digest(spec: MeasureSpec) -> str:
    return hashlib.sha256(specfile.dumps(spec).encode()).hexdigest()[:16]


@dataclass
class ScenarioReport:
    scenario: str
    inputs: dict[str, str] = field(default_factory=dict)
    verdicts: list[dict] = field(default_factory=list)
    values: Optional[ValueSample] = None
    certificates: list[ValuationCertificate] = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    runtime_ms: int = 0

    def add_verdict(self, label: str, verdict: Verdict) -> None:
        self.verdicts.append(_verdict_json(label, verdict))
        if verdict.certificate is not None:
            self.certificates.append(verdict.certificate)

    def to_json(self) -> dict:
        # runtime_ms is deliberately left out: identical inputs must yield
        # byte-identical documents
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "scenario": self.scenario,
            "inputs": dict(sorted(self.inputs.items())),
            "verdicts": self.verdicts,
            "values": None if self.values is None else _sample_json(self.values),
            "certificates": [_certificate_json(c) for c in self.certificates],
            "artifacts": self.artifacts,
        }

    def to_text(self) -> str:
        lines = [f"scenario: {self.scenario}  ({self.runtime_ms} ms)"]
        for name, digest in sorted(self.inputs.items()):
            lines.append(f"  input {name}: {digest}")
        for v in self.verdicts:
            extra = ""
            if "target" in v:
                extra += f"  target={v['target']}"
            if "certificate" in v:
                extra += f"  cert(q={v['certificate']['q']})"
            lines.append(f"  [{v['kind']:>13}] {v['label']}{extra}")
            if v.get("reason"):
                lines.append(f"                  {v['reason']}")
        if self.values is not None:
            vals = ", ".join(_rat(v) for v in self.values.values[:12])
            more = "" if len(self.values.values) <= 12 else ", ..."
            lines.append(
                f"  values (depth {self.values.depth}): {{{vals}{more}}}"
            )
        for key, val in sorted(self.artifacts.items()):
            lines.append(f"  {key}: {json.dumps(val, sort_keys=True)}")
        return "\n".join(lines) + "\n"


def emit_report(report: ScenarioReport, fmt: str, out: Optional[str]) -> int:
    if fmt == "json":
        text = json.dumps(report.to_json(), sort_keys=True, indent=2) + "\n"
    else:
        text = report.to_text()
    if out is None or out == "-":
        sys.stdout.write(text)
        return 0
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as err:
        print(f"error: cannot write {out}: {err}", file=sys.stderr)
        return 2
    return 0


# ---------------------------------------------------------------------------
# Scenario catalog (data-driven: name -> builder).


def _scenario_bratteli_fn(params: dict) -> ScenarioReport:
    lo, hi = params.get("range", (3, 17))
    report = ScenarioReport("bratteli-fn", inputs={"range": f"{lo}..{hi}"})
    table = {}
    for n in range(lo, hi + 1):
        lam, x = catalog.fn_eigendata(n)
        verdict = decide_bratteli_good(
            catalog.transpose(catalog.incidence_fn(n)), lam, x
        )
        report.add_verdict(f"F_{n} (lam={lam})", verdict)
        table[str(n)] = verdict.kind
    report.artifacts["good_for"] = sorted(
        int(n) for n, k in table.items() if k == "good"
    )
    return report


def _scenario_bernoulli_13_23(params: dict) -> ScenarioReport:
    depth = params.get("depth", 4)
    budget = params.get("budget", DEFAULT_BUDGET)
    spec = catalog.bernoulli_13_23()
    report = ScenarioReport(
        "bernoulli-13-23", inputs={"spec": spec_digest(spec)}
    )
    witness = find_nongood_witness(spec, depth, budget=budget)
    report.add_verdict("witness search", witness)
    sample = enumerate_values(spec, depth, 1, 1, budget)
    report.values = sample
    group = value_group(spec)
    report.artifacts["sample_in_triadic_group"] = all(
        group.contains(v) for v in sample.values
    )
    if witness.is_not_good and witness.certificate is not None:
        report.artifacts["certificate_valid"] = check_valuation_certificate(
            spec, witness.certificate
        )
        depths = {}
        for d in range(1, 9):
            got = carve(spec, witness.region, witness.target, d, budget=10**9)
            depths[str(d)] = isinstance(got, NotFound)
        report.artifacts["carve_not_found_to_depth"] = depths
    return report


def _scenario_example2(params: dict) -> ScenarioReport:
    depth = params.get("depth", 2)
    forest = catalog.example2_forest()
    balanced = catalog.example2_balanced()
    report = ScenarioReport(
        "example2-compactifications",
        inputs={"forest": spec_digest(forest), "balanced": spec_digest(balanced)},
    )
    from .space import two_point_by_parity

    report.add_verdict(
        "one-point",
        decide_compactification_good(forest, one_point_compactification()),
    )
    report.add_verdict(
        "odd/even two-point",
        decide_compactification_good(forest, two_point_by_parity()),
    )
    report.add_verdict(
        "balanced two-point",
        decide_compactification_good(balanced, two_point_by_parity()),
    )
    sample = compactified_value_sample(
        balanced, two_point_by_parity(), depth, 4
    )
    base = enumerate_values(balanced, depth, 4, 1)
    cap = F(17, 32)
    report.artifacts["balanced_sample_is_base_plus_one"] = (
        {v for v in sample if v <= cap} == {v for v in base.values if v <= cap}
        and F(1) in sample
    )
    report.values = base
    return report


def _scenario_cf(params: dict) -> ScenarioReport:
    c_sizes = params.get("c_sizes", (2, 3, 2))
    depth = params.get("depth", 3)
    spec = catalog.cf_example(tuple(c_sizes))
    report = ScenarioReport("cf-construction", inputs={"spec": spec_digest(spec)})
    report.add_verdict("structural goodness", goodness_verdict(spec))
    group = value_group(spec)
    report.artifacts["value_group"] = str(group)
    sample = enumerate_values(spec, depth, 4, 1)
    report.values = sample
    grid = 1
    for c in c_sizes:
        grid *= c
    report.artifacts["sample_on_grid"] = all(
        (v * grid).denominator == 1 or group.contains(v) for v in sample.values
    )
    report.artifacts["grid"] = f"a/{grid}"
    return report


def _scenario_padic(params: dict) -> ScenarioReport:
    p = params.get("p", 5)
    queries = params.get("query", (F(3, 25), F(1, 2)))
    spec = catalog.PAdicHaar(p)
    report = ScenarioReport("padic-haar", inputs={"spec": spec_digest(spec)})
    report.add_verdict("structural goodness", goodness_verdict(spec))
    values = good_value_set(spec)
    report.artifacts["value_group"] = str(value_group(spec))
    report.artifacts["membership"] = {
        _rat(q): values.contains(q) for q in queries
    }
    return report


def _scenario_punctured(params: dict) -> ScenarioReport:
    depth = params.get("depth", 4)
    spec = catalog.punctured_bernoulli_13_23()
    report = ScenarioReport(
        "punctured-bernoulli", inputs={"spec": spec_digest(spec)}
    )
    report.add_verdict(
        "witness search", find_nongood_witness(spec, min(depth, 3))
    )
    sample = enumerate_values(spec, depth, 4, 1)
    report.values = sample
    # every value is 2k/3^n: even numerator over a power of three
    report.artifacts["sample_in_even_triadic_set"] = all(
        v == 0 or (v.numerator % 2 == 0 and _power_of(v.denominator, 3))
        for v in sample.values
    )
    return report


def _power_of(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def _scenario_back_and_forth(params: dict) -> ScenarioReport:
    stages = params.get("stages", 6)
    a, b = catalog.dyadic_forest_a(), catalog.dyadic_forest_b()
    report = ScenarioReport(
        "back-and-forth-dyadic",
        inputs={"forest_a": spec_digest(a), "forest_b": spec_digest(b)},
    )
    criterion = homeo_criterion(a, b)
    report.artifacts["criterion"] = {
        "kind": criterion.kind,
        "reason": criterion.reason,
    }
    result = back_and_forth(a, b, stages)
    report.artifacts["stages"] = [
        {
            "mass": _rat(s.mass),
            "source": _region_json(s.source),
            "target": _region_json(s.target),
        }
        for s in result.stages
    ]
    report.artifacts["matched_mass"] = _rat(result.matched_mass())
    return report


def _scenario_product(params: dict) -> ScenarioReport:
    spec_ones = catalog.counting_product()
    spec_13 = catalog.counting_product(cycle=(F(1), F(3)))
    report = ScenarioReport(
        "product-counting",
        inputs={
            "ones": spec_digest(spec_ones),
            "cycle_1_3": spec_digest(spec_13),
        },
    )
    report.add_verdict("weights all ones", goodness_verdict(spec_ones))
    bad = goodness_verdict(spec_13)
    report.add_verdict("weights cycling (1, 3)", bad)
    if bad.is_not_good:
        got = carve(spec_13, bad.region, bad.target, 4)
        report.artifacts["witness_carve_not_found"] = isinstance(got, NotFound)
    return report


SCENARIOS: dict[str, tuple[Callable[[dict], ScenarioReport], str]] = {
    "bratteli-fn": (
        _scenario_bratteli_fn,
        "goodness of the F_N diagram family over an N range",
    ),
    "bernoulli-13-23": (
        _scenario_bernoulli_13_23,
        "non-goodness of beta(1/3, 2/3) with a valuation certificate",
    ),
    "example2-compactifications": (
        _scenario_example2,
        "one-point and two two-point compactifications of the dyadic forest",
    ),
    "cf-construction": (
        _scenario_cf,
        "goodness and value grid of a (C,F) space",
    ),
    "padic-haar": (
        _scenario_padic,
        "value-set membership and goodness of p-adic Haar measure",
    ),
    "punctured-bernoulli": (
        _scenario_punctured,
        "value set of the punctured beta(1/3, 2/3) space",
    ),
    "back-and-forth-dyadic": (
        _scenario_back_and_forth,
        "stage-wise correspondence between two dyadic forests",
    ),
    "product-counting": (
        _scenario_product,
        "product-with-counting-measure goodness criterion",
    ),
}


def run_scenario(name: str, params: dict) -> ScenarioReport:
    if name not in SCENARIOS:
        raise UsageError(
            f"unknown scenario {name!r}; available: {', '.join(sorted(SCENARIOS))}"
        )
    start = time.monotonic()
    report = SCENARIOS[name][0](params)
    report.runtime_ms = int((time.monotonic() - start) * 1000)
    return report


# ---------------------------------------------------------------------------
# Subcommands.


def _load_spec(path: Optional[str]) -> MeasureSpec:
    if path is None:
        raise UsageError("--spec FILE is required")
    try:
        return specfile.load(path)
    except FileNotFoundError as err:
        raise UsageError(str(err)) from err
    except specfile.SpecFormatError as err:
        raise UsageError(f"{path}: {err}") from err


def _check_expect(report: ScenarioReport, expect: Optional[str]) -> int:
    if expect is None:
        return 0
    kinds = {v["kind"] for v in report.verdicts}
    if kinds == {expect}:
        return 0
    print(
        f"expect failed: wanted {expect!r}, got {sorted(kinds)}",
        file=sys.stderr,
    )
    return 1


def cmd_values(args: argparse.Namespace) -> int:
    spec = _load_spec(args.spec)
    bound = parse_rational(args.bound) if args.bound else F(1)
    sample = enumerate_values(spec, args.depth, args.horizon, bound, args.budget)
    report = ScenarioReport("values", inputs={"spec": spec_digest(spec)})
    report.values = sample
    group = value_group(spec)
    report.artifacts["value_group"] = None if group is None else str(group)
    return emit_report(report, args.format, args.out)


def cmd_good(args: argparse.Namespace) -> int:
    spec = _load_spec(args.spec)
    report = ScenarioReport("good", inputs={"spec": spec_digest(spec)})
    structural = goodness_verdict(spec)
    report.add_verdict("structural decider", structural)
    if structural.kind == "unknown" and args.depth:
        report.add_verdict(
            "bounded search",
            find_nongood_witness(spec, args.depth, args.horizon, args.budget),
        )
    code = emit_report(report, args.format, args.out)
    return code or _check_expect(report, args.expect)


def cmd_carve(args: argparse.Namespace) -> int:
    spec = _load_spec(args.spec)
    region = parse_region(args.region) if args.region else CompactOpen.of(CellId(1))
    target = parse_rational(args.target)
    got = carve(spec, region, target, args.depth, args.budget)
    report = ScenarioReport("carve", inputs={"spec": spec_digest(spec)})
    if isinstance(got, NotFound):
        report.artifacts["result"] = {"not_found_depth": got.depth}
    else:
        report.artifacts["result"] = {
            "cells": _region_json(got),
            "mass": _rat(mass_of(spec, got).value),
        }
    return emit_report(report, args.format, args.out)


def cmd_certify(args: argparse.Namespace) -> int:
    spec = _load_spec(args.spec)
    cert = ValuationCertificate(
        args.q,
        parse_region(args.region),
        args.threshold,
        parse_rational(args.target),
    )
    ok = check_valuation_certificate(spec, cert)
    report = ScenarioReport("certify", inputs={"spec": spec_digest(spec)})
    report.certificates.append(cert)
    report.artifacts["valid"] = ok
    code = emit_report(report, args.format, args.out)
    if args.expect is not None:
        want = args.expect == "valid"
        return code or (0 if ok == want else 1)
    return code


def cmd_homeo(args: argparse.Namespace) -> int:
    spec_a = _load_spec(args.spec)
    spec_b = _load_spec(args.spec2)
    report = ScenarioReport(
        "homeo",
        inputs={"spec": spec_digest(spec_a), "spec2": spec_digest(spec_b)},
    )
    verdict = homeo_criterion(spec_a, spec_b)
    report.artifacts["criterion"] = {"kind": verdict.kind, "reason": verdict.reason}
    if args.stages and verdict.is_homeomorphic:
        result = back_and_forth(spec_a, spec_b, args.stages, args.depth)
        report.artifacts["stages"] = [
            {
                "mass": _rat(s.mass),
                "source": _region_json(s.source),
                "target": _region_json(s.target),
            }
            for s in result.stages
        ]
        report.artifacts["matched_mass"] = _rat(result.matched_mass())
    code = emit_report(report, args.format, args.out)
    if args.expect is not None:
        return code or (0 if verdict.kind == args.expect else 1)
    return code


def cmd_compactify(args: argparse.Namespace) -> int:
    spec = _load_spec(args.spec)
    report = ScenarioReport("compactify", inputs={"spec": spec_digest(spec)})
    if args.gamma is not None:
        result = gamma_compactification(
            spec, parse_rational(args.gamma), max_depth=args.depth
        )
        report.add_verdict(f"gamma={args.gamma}", result.verdict)
        report.artifacts["gamma_steps"] = [_rat(g) for g in result.gamma_steps]
        report.artifacts["regions"] = [_region_json(r) for r in result.regions]
    else:
        k = args.points
        if k < 1:
            raise UsageError("--points must be >= 1")
        classes = tuple(
            IndexClass(k, frozenset({r % k})) for r in range(1, k + 1)
        )
        comp = CompactificationSpec(classes)
        report.add_verdict(
            f"{k}-point remainder", decide_compactification_good(spec, comp)
        )
    code = emit_report(report, args.format, args.out)
    return code or _check_expect(report, args.expect)


def cmd_scenario(args: argparse.Namespace) -> int:
    params: dict[str, Any] = {}
    if args.range:
        lo, _, hi = args.range.partition("..")
        try:
            params["range"] = (int(lo), int(hi))
        except ValueError as err:
            raise UsageError(f"bad range {args.range!r}") from err
    if args.depth is not None:
        params["depth"] = args.depth
    if args.stages is not None:
        params["stages"] = args.stages
    if args.p is not None:
        params["p"] = args.p
    if args.query:
        params["query"] = tuple(parse_rational(q) for q in args.query)
    if args.budget is not None:
        params["budget"] = args.budget
    names = args.names
    if args.jobs > 1 and len(names) > 1:
        with concurrent.futures.ThreadPoolExecutor(args.jobs) as pool:
            reports = list(pool.map(lambda n: run_scenario(n, params), names))
    else:
        reports = [run_scenario(n, params) for n in names]
    code = 0
    for report in reports:
        code = emit_report(report, args.format, args.out) or code
        code = code or _check_expect(report, args.expect)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cantorgood",
        description="exact value sets, goodness and correspondences for "
        "measures on (locally) compact Cantor sets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, spec2: bool = False) -> None:
        p.add_argument("--spec", help="measure-spec JSON file")
        if spec2:
            p.add_argument("--spec2", help="second measure-spec JSON file")
        p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
        p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        p.add_argument("--format", choices=("json", "text"), default="text")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--expect", help="fail (exit 1) unless verdicts match")

    p = sub.add_parser("values", help="enumerate a value-set truncation")
    common(p)
    p.add_argument("--bound", help="upper bound (rational, default 1)")
    p.set_defaults(fn=cmd_values)

    p = sub.add_parser("good", help="decide or search goodness")
    common(p)
    p.set_defaults(fn=cmd_good)

    p = sub.add_parser("carve", help="carve a clopen set of prescribed mass")
    common(p)
    p.add_argument("--region", help="comma-separated cells, e.g. '1:1,2:0'")
    p.add_argument("--target", required=True, help="target mass (rational)")
    p.set_defaults(fn=cmd_carve)

    p = sub.add_parser("certify", help="check a valuation certificate")
    common(p)
    p.add_argument("--q", type=int, required=True, help="prime")
    p.add_argument("--threshold", type=int, required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--region", required=True)
    p.set_defaults(fn=cmd_certify)

    p = sub.add_parser("homeo", help="homeomorphism criterion / construction")
    common(p, spec2=True)
    p.add_argument("--stages", type=int, default=0)
    p.set_defaults(fn=cmd_homeo)

    p = sub.add_parser("compactify", help="finite-remainder compactifications")
    common(p)
    p.add_argument("--points", type=int, default=1, help="remainder size k")
    p.add_argument("--gamma", help="prescribed new clopen value")
    p.set_defaults(fn=cmd_compactify)

    p = sub.add_parser("scenario", help="run named scenarios")
    common(p)
    p.add_argument("names", nargs="+", metavar="NAME")
    p.add_argument("--range", help="N range for bratteli-fn, e.g. 3..17")
    p.add_argument("--stages", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--query", action="append", help="rational (repeatable)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_scenario, depth=None, budget=None)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 2 if err.code not in (0, None) else 0
    try:
        return args.fn(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    except (DomainError, BudgetError, specfile.SpecFormatError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
