"""Command-line frontend.

Exit codes: 0 success, 1 a certificate was not accepted or a reference
value was not reproduced, 2 usage or parse error, 3 resource cap or
exponent overflow.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

from . import __version__
from .bracket import BracketOptions, height_bracket
from .catalog import FAMILIES, RdpSpec, closed_form_heights, equation_of
from .certify import COROLLARY_FORM, TABLE_FORM, WitnessSpec, non_split_certificate, \
    verify_regular_witness, verify_split_witness
from .poly import ExponentOverflowError, ResourceLimitError, parse_polynomial
from .suites import DEFAULT_SEED, SUITES

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
FORMS = {"corollary": COROLLARY_FORM, "table": TABLE_FORM}


class UsageError(Exception):
    pass


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def _report(rows: list[dict], suite: dict | None = None) -> dict:
    out = {"version": __version__, "rows": rows}
    if suite is not None:
        out["suite"] = suite
    return out


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# subcommands -------------------------------------------------------------------

def _spec_from_args(args) -> RdpSpec | None:
    if args.family is None:
        return None
    if args.f is not None:
        raise UsageError("give either --family or --f, not both")
    return RdpSpec(args.p, args.family, args.n, args.coindex)


def cmd_heights(args) -> tuple[int, dict, str, str]:
    spec = _spec_from_args(args)
    if spec is None:
        f = parse_polynomial(args.f if args.f is not None else "x")
        type_, text, params = "custom", str(f), {"f": str(f)}
    else:
        f = equation_of(spec)
        type_, text, params = spec.label, str(f), {k: v for k, v in spec.describe().items()
                                                    if k not in ("p", "family")}
    options = BracketOptions(use_brute_search=args.search, search_degree_bound=args.degree_bound)
    rows, code = [], EXIT_OK
    for e in args.e:
        start = time.perf_counter()
        b = height_bracket(f, e, args.n_max, args.p, spec=spec, options=options)
        elapsed = 0 if args.no_timing else int((time.perf_counter() - start) * 1000)
        row = {"p": args.p, "family": spec.family if spec else "custom", "params": params,
               "e": e, "heights": b.to_json(), "provenance": "certified" if b.exact else "partial",
               "elapsedMillis": elapsed}
        if spec is not None:
            expected = closed_form_heights(spec, e).height
            row["reference"] = expected
            if b.exact and b.lower != expected:
                code = EXIT_MISMATCH
        rows.append(row)
    text_out = "\n".join(
        f"p={r['p']} {type_} e={r['e']}: "
        + (f"sht^e = {r['heights']['lower']}" if r["heights"]["exact"]
           else f"{r['heights']['lower']} <= sht^e <= {r['heights']['upper'] or '?'}")
        + (f" (reference {r['reference']})" if "reference" in r else "")
        for r in rows) + "\n"
    csv_out = _csv(["p", "type", "f", "e", "lower", "upper", "exact", "provenance", "elapsedMillis"],
                   [[r["p"], type_, text, r["e"], r["heights"]["lower"], r["heights"]["upper"],
                     r["heights"]["exact"], r["provenance"], r["elapsedMillis"]] for r in rows])
    return code, _report(rows), text_out, csv_out


def cmd_verify(args) -> tuple[int, dict, str, str]:
    runner = SUITES[args.suite]
    report = runner(args.seed) if args.suite == "lemmas" else runner()
    lines = [f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f": {c.detail}" if not c.passed and c.detail else "")
             for c in report.checks]
    lines.append(f"{args.suite}: {len(report.checks) - len(report.failed)}/{len(report.checks)} passed")
    csv_out = _csv(["check", "passed", "detail"],
                   [[c.name, c.passed, "" if c.passed else c.detail] for c in report.checks])
    code = EXIT_OK if report.passed else EXIT_MISMATCH
    return code, _report([], report.to_json()), "\n".join(lines) + "\n", csv_out


def _outcome_outputs(outcome, extra: dict) -> tuple[int, dict, str, str]:
    row = outcome.to_json() | extra
    lines = [f"{outcome.kind}: {outcome.verdict}"]
    lines += [f"  {c.label}: {'pass' if c.passed else 'fail'}" + (f" ({c.offender})" if c.offender else "")
              for c in outcome.conditions]
    csv_out = _csv(["label", "pass", "offender"],
                   [[c.label, c.passed, c.offender or ""] for c in outcome.conditions])
    code = EXIT_OK if outcome.accepted else EXIT_MISMATCH
    return code, _report([row]), "\n".join(lines) + "\n", csv_out


def cmd_check_witness(args) -> tuple[int, dict, str, str]:
    f = parse_polynomial(args.f)
    c = parse_polynomial(args.c) if args.c is not None else None
    tau = parse_polynomial(args.tau) if args.tau is not None else None
    w = WitnessSpec(f, args.p, args.e, args.n, parse_polynomial(args.a), FORMS[args.form], c, tau)
    outcome = (verify_regular_witness(w, args.strategy) if c is not None
               else verify_split_witness(w, args.strategy))
    return _outcome_outputs(outcome, {"witness": w.describe()})


def cmd_certify_nonsplit(args) -> tuple[int, dict, str, str]:
    f = parse_polynomial(args.f)
    outcome = non_split_certificate(f, args.e, args.n, args.p, args.mode)
    return _outcome_outputs(outcome, {"f": str(f), "mode": args.mode})


# argument parsing ----------------------------------------------------------------

def _common_options(top_level: bool) -> argparse.ArgumentParser:
    # subcommands repeat the shared flags without defaults, so a flag given
    # before the subcommand is not overwritten
    def d(value):
        return value if top_level else argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default=d("text"))
    common.add_argument("--seed", type=int, default=d(DEFAULT_SEED),
                        help="seed for randomized suites")
    common.add_argument("--no-timing", action="store_true", default=d(False),
                        help="report elapsedMillis as 0 so reports are byte-stable")
    return common


def build_parser() -> argparse.ArgumentParser:
    top, common = _common_options(True), _common_options(False)
    parser = argparse.ArgumentParser(prog="qfheight", parents=[top],
                                     description="Certified quasi-F-split heights of hypersurfaces.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    h = sub.add_parser("heights", parents=[common], help="bracket sht^e with certificates")
    h.add_argument("--p", type=int, default=2)
    h.add_argument("--family", choices=FAMILIES)
    h.add_argument("--n", type=int, help="n of D_2n / D_2n+1")
    h.add_argument("--coindex", type=int, default=0)
    h.add_argument("--f", help="polynomial in x, y, z (instead of a family)")
    h.add_argument("--e", type=int, nargs="+", default=[1])
    h.add_argument("--n-max", type=int, default=6)
    h.add_argument("--search", action="store_true", help="add brute-force witness search")
    h.add_argument("--degree-bound", type=int, default=6)
    h.set_defaults(run=cmd_heights)

    v = sub.add_parser("verify", parents=[common], help="run a reproduction suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.set_defaults(run=cmd_verify)

    w = sub.add_parser("check-witness", parents=[common], help="verify a split or regular witness")
    w.add_argument("--f", required=True)
    w.add_argument("--p", type=int, default=2)
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--e", type=int, required=True)
    w.add_argument("--a", required=True)
    w.add_argument("--c")
    w.add_argument("--tau", help="t with c = t^4 (checked syntactically)")
    w.add_argument("--form", choices=sorted(FORMS), default="corollary")
    w.add_argument("--strategy", choices=("direct", "reduced"), default="direct")
    w.set_defaults(run=cmd_check_witness)

    c = sub.add_parser("certify-nonsplit", parents=[common], help="lower-bound certificate")
    c.add_argument("--f", required=True)
    c.add_argument("--p", type=int, default=2)
    c.add_argument("--e", type=int, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--mode", choices=("viaJe", "viaMaximalIdeal"), default="viaJe")
    c.set_defaults(run=cmd_certify_nonsplit)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        code, report, text, csv_text = args.run(args)
    except (ResourceLimitError, ExponentOverflowError) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (UsageError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.write({"json": dump_report(report), "csv": csv_text, "text": text}[args.format])
    return code


def main_entry() -> None:
    sys.exit(main())
