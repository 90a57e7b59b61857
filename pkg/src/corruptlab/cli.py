"""Command-line front end.

Subcommands: ``analyze`` a kernel file, reproduce closed-form ``tables`` on a
parameter grid, ``plan`` acquisitions against a budget, ``simulate`` risk
curves, and evaluate ``lecam`` lower bounds.  JSON in, JSON or CSV out; all
output is byte-stable for fixed inputs and seeds.

Exit codes: 0 success, 2 invalid input, 3 numerical failure or tripped guard.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import catalog, divergence, planner
from .bounds import lecam_corrupted, lecam_mixed, lecam_replicated, mixed_from_json, problem_from_json, separation
from .errors import NUMERICAL_ERRORS, VALIDATION_ERRORS, ParseError, UnknownFamily
from .kernels import kernel_from_json
from .reconstruct import (
    corrected_sup_norm,
    is_reconstructible,
    loss_from_json,
    op_norm_row_sum,
    pseudoinverse,
    zero_one_loss,
)
from .simlab import config_from_json, fastrate_curve, risk_curve

TABLE_HEADER = (
    "param,alpha_closed,alpha_numeric,row_norm_closed,row_norm_numeric,"
    "corrected01_closed,corrected01_numeric,max_abs_diff,flag"
)

#: Grid families: symmetric single-parameter sweeps of each catalog family.
_FAMILY_BUILDERS = {
    catalog.BINARY: lambda s, k: catalog.binary_label_noise(s, s),
    catalog.SYMMETRIC: lambda s, k: catalog.symmetric_label_noise(k, s),
    catalog.SEMI_SUPERVISED: lambda s, k: catalog.semi_supervised(s, s),
    catalog.PARTIAL: lambda s, k: catalog.partial_labels(s),
}


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ParseError(f'grid must be "start:end:step", got {text!r}')
    try:
        start, end, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ParseError(f"non-numeric grid bound in {text!r}") from exc
    if step <= 0:
        raise ParseError("grid step must be positive")
    values = []
    k = 0
    while True:
        v = start + k * step
        if v > end + 1e-12:
            break
        values.append(round(v, 12))  # keep grid labels clean in the CSV
        k += 1
    return values


def _theta_ref(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def cmd_analyze(args) -> int:
    kernel = kernel_from_json(_load_json(args.kernel))
    report = {
        "alpha": divergence.alpha(kernel),
        "lambda": divergence.lambda_coeff(kernel),
        "reconstructible": is_reconstructible(kernel),
        "row_norm": None,
    }
    if report["reconstructible"]:
        report["row_norm"] = op_norm_row_sum(pseudoinverse(kernel))
    if args.loss is not None:
        loss = loss_from_json(_load_json(args.loss))
        report["corrected_sup"] = (
            corrected_sup_norm(pseudoinverse(kernel), loss)
            if report["reconstructible"] else None
        )
    _emit(report)
    return 0


def _cell(value) -> str:
    return "" if value is None else repr(float(value))


def cmd_tables(args) -> int:
    if args.family not in _FAMILY_BUILDERS:
        raise UnknownFamily(
            f"unknown family {args.family!r}; known: {', '.join(sorted(_FAMILY_BUILDERS))}"
        )
    build = _FAMILY_BUILDERS[args.family]
    lines = [TABLE_HEADER]
    for sigma in _parse_grid(args.grid):
        spec = build(sigma, args.classes)
        kernel = catalog.build_kernel(spec)
        closed = catalog.closed_form_stats(spec)
        alpha_numeric = divergence.alpha(kernel)
        cells = {"alpha": (closed.alpha, alpha_numeric)}
        if is_reconstructible(kernel):
            rec = pseudoinverse(kernel)
            row_numeric = op_norm_row_sum(rec)
            sup_numeric = corrected_sup_norm(rec, zero_one_loss(kernel.domain))
            cells["row"] = (closed.row_norm, row_numeric)
            cells["sup"] = (closed.corrected01_norm, sup_numeric)
            flag = ""
        else:
            cells["row"] = (closed.row_norm, None)
            cells["sup"] = (closed.corrected01_norm, None)
            flag = "non-reconstructible"
        diffs = [
            abs(c - n) for c, n in cells.values() if c is not None and n is not None
        ]
        lines.append(",".join([
            repr(float(sigma)),
            _cell(cells["alpha"][0]), _cell(cells["alpha"][1]),
            _cell(cells["row"][0]), _cell(cells["row"][1]),
            _cell(cells["sup"][0]), _cell(cells["sup"][1]),
            _cell(max(diffs) if diffs else None),
            flag,
        ]))
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def cmd_plan(args) -> int:
    offers = planner.offers_from_json(_load_json(args.offers))
    try:
        budget = Fraction(args.budget)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad budget {args.budget!r}: {exc}") from exc
    report = {
        "greedy": planner.greedy_plan(offers, budget).to_json(),
        "exact": planner.exact_plan(offers, budget).to_json(),
        "ranking_lower": planner.rank_sources_lower(offers),
        "ranking_upper": (
            planner.rank_sources_upper(offers)
            if all(o.corrected_sup is not None for o in offers) else None
        ),
    }
    _emit(report)
    return 0


def cmd_simulate(args) -> int:
    config = config_from_json(_load_json(args.config))
    if args.mode == "fast-rate":
        report = fastrate_curve(config)
        csv = report.curve.to_csv()
        _emit({
            "ratios": {str(n): r for n, r in report.ratios},
            "mean_ratio": report.mean_ratio,
        })
    else:
        csv = risk_curve(config).to_csv()
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv)
    return 0


def cmd_lecam(args) -> int:
    problem = problem_from_json(_load_json(args.problem))
    t1, t2 = _theta_ref(args.theta1), _theta_ref(args.theta2)
    report = {
        "rho": separation(problem, t1, t2),
        "n": args.n,
    }
    if args.kernel is not None:
        kernel = kernel_from_json(_load_json(args.kernel))
        report["alpha"] = divergence.alpha(kernel)
        report["effective_count"] = report["alpha"] * args.n
        report["value"] = lecam_corrupted(problem, kernel, t1, t2, args.n)
        report["unclamped"] = lecam_corrupted(problem, kernel, t1, t2, args.n, clamped=False)
    elif args.mix is not None:
        mix = mixed_from_json(_load_json(args.mix))
        report["effective_count"] = mix.effective_count()
        report["value"] = lecam_mixed(problem, mix, t1, t2)
        report["unclamped"] = lecam_mixed(problem, mix, t1, t2, clamped=False)
    else:
        report["effective_count"] = args.n
        report["value"] = lecam_replicated(problem, t1, t2, args.n)
        report["unclamped"] = lecam_replicated(problem, t1, t2, args.n, clamped=False)
    _emit(report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corruptlab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="contraction and reconstruction statistics of a kernel")
    p.add_argument("--kernel", required=True, help="kernel JSON file")
    p.add_argument("--loss", help="loss JSON file for the corrected sup norm")
    p.set_defaults(run=cmd_analyze)

    p = sub.add_parser("tables", help="closed-form vs numeric statistics on a parameter grid")
    p.add_argument("--family", required=True, help="corruption family name")
    p.add_argument("--grid", required=True, help='parameter grid "start:end:step"')
    p.add_argument("--classes", type=int, default=3, help="class count for symmetric noise")
    p.set_defaults(run=cmd_tables)

    p = sub.add_parser("plan", help="acquisition plans and source rankings under a budget")
    p.add_argument("--offers", required=True, help="offers JSON file")
    p.add_argument("--budget", required=True, help="budget as a rational, e.g. 10 or 7/2")
    p.set_defaults(run=cmd_plan)

    p = sub.add_parser("simulate", help="Monte-Carlo risk curve to CSV")
    p.add_argument("--config", required=True, help="experiment config JSON file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--mode", choices=["standard", "fast-rate"], default="standard")
    p.set_defaults(run=cmd_simulate)

    p = sub.add_parser("lecam", help="two-point lower bounds, plain or corrupted")
    p.add_argument("--problem", required=True, help="decision problem JSON file")
    p.add_argument("--theta1", required=True, help="hypothesis name or index")
    p.add_argument("--theta2", required=True, help="hypothesis name or index")
    p.add_argument("--n", type=float, default=1.0, help="replication count")
    p.add_argument("--kernel", help="corruption kernel JSON file")
    p.add_argument("--mix", help="mixed corruption JSON file (overrides --n)")
    p.set_defaults(run=cmd_lecam)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
