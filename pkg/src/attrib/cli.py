"""Command line front end.

Exit codes: 0 success, 2 malformed input, 3 numeric non-convergence.
"""
from __future__ import annotations

import argparse
import json
import sys

from .axioms import InstanceGenerator, run_axiom_suite
from .models import ModelError, parse_dag, parse_model, parse_snapshots
from .reports import mix_effects_demo, render_machine, render_mix_effects, render_text, resolve_method, run_report

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attrib",
        description="Attribute the change of a model's value to its variables.",
    )
    parser.add_argument("--model", metavar="PATH", help="model file (variables, terms, segments)")
    parser.add_argument("--dag", metavar="PATH", help="graph file compiled into a model")
    parser.add_argument("--values", metavar="PATH", help="CSV snapshot rows entity,variable,initial,final")
    parser.add_argument("--method", metavar="ID", default="ass",
                        help="ass | ss-brute | as-numeric | naive | random-order:<weights-file> (default: ass)")
    parser.add_argument("--tol", metavar="X", type=float, default=None,
                        help="quadrature tolerance for as-numeric, axiom tolerance for --axiom-suite")
    parser.add_argument("--max-refine", metavar="N", type=int, default=None,
                        help="panel doublings allowed before as-numeric gives up")
    parser.add_argument("--seed", metavar="N", type=int, default=0, help="seed for --axiom-suite instances")
    parser.add_argument("--trials", metavar="N", type=int, default=200, help="trials per axiom for --axiom-suite")
    parser.add_argument("--report", choices=("text", "machine"), default="text")
    parser.add_argument("--axiom-suite", action="store_true", help="verify the axioms for --method and exit")
    parser.add_argument("--demo", choices=("mix-effects",), help="run a built-in demonstration")
    return parser


def _axiom_suite(args) -> int:
    method = resolve_method(args.method, tol=args.tol, max_refine=args.max_refine)
    gen = InstanceGenerator(seed=args.seed)
    tol = args.tol if args.tol is not None else 1e-8
    verdicts = run_axiom_suite(method, gen, trials=args.trials, tol=tol)
    if args.report == "machine":
        print(json.dumps([v.to_dict() for v in verdicts], indent=2))
    else:
        print(f"axiom suite: method={args.method} trials={args.trials} tol={tol:g} seed={args.seed}")
        for v in verdicts:
            flag = "PASS" if v.passed else "FAIL"
            note = f"  ({v.note})" if v.note else ""
            print(f"{flag}  {v.axiom:<26} worst violation {v.worst:.3e}{note}")
    return EXIT_OK


def _run_reports(args) -> int:
    if args.model and args.dag:
        raise ModelError("give either --model or --dag, not both")
    if not args.values:
        raise ModelError("--values is required")
    if args.model:
        with open(args.model, encoding="utf-8") as handle:
            model = parse_model(handle.read(), args.model)
    else:
        with open(args.dag, encoding="utf-8") as handle:
            model = parse_dag(handle.read(), args.dag)
    with open(args.values, encoding="utf-8") as handle:
        snaps = parse_snapshots(handle.read(), args.values)
    if not snaps:
        raise ModelError(f"{args.values}: no snapshot rows")
    all_converged = True
    blocks = []
    for snap in snaps:
        report = run_report(model, snap, args.method, tol=args.tol, max_refine=args.max_refine)
        all_converged = all_converged and report.converged
        blocks.append(render_machine(report) if args.report == "machine" else render_text(report))
    print(("\n" if args.report == "machine" else "\n\n").join(blocks))
    return EXIT_OK if all_converged else EXIT_NUMERIC


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.demo == "mix-effects":
            demo = mix_effects_demo()
            if args.report == "machine":
                print(render_machine(demo.segmented))
                print(render_machine(demo.aggregate))
            else:
                print(render_mix_effects(demo))
            return EXIT_OK
        if args.axiom_suite:
            return _axiom_suite(args)
        if not (args.model or args.dag):
            parser.error("one of --model, --dag, --axiom-suite, --demo is required")
        return _run_reports(args)
    except (ModelError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
