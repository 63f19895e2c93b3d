"""Command line entry point: ``bayesfem run`` and ``bayesfem compare``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import InvalidInputError, NumericalError
from .harness import (
    SAMPLERS,
    builtin_case,
    compare,
    format_comparison,
    format_report,
    parse_config,
    run_case,
)


def _load_case(case: str):
    path = Path(case)
    if path.suffix in (".ini", ".cfg") or path.exists():
        return parse_config(path)
    return builtin_case(case)


def _apply_overrides(cs, args):
    changes = {}
    if args.samples is not None:
        changes["n_samples"] = args.samples
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.metric is not None:
        changes["metric"] = args.metric
    if args.prior_mean is not None:
        changes["prior_mean"] = args.prior_mean
    cs = replace(cs, **changes)
    if getattr(args, "sampler", None) is not None:
        cs = replace(cs, sampler=replace(cs.sampler, name=args.sampler))
    cs.posterior()
    return cs


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bayesfem", description="Bayesian FE model updating of a cantilever beam.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--case", required=True, help="builtin case (young5, inertia_area4) or path to an INI file")
        p.add_argument("--samples", type=int, help="number of retained samples")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--metric", choices=("relative", "absolute"))
        p.add_argument("--prior-mean", dest="prior_mean", choices=("zero", "nominal"))

    run = sub.add_parser("run", help="sample one case with one sampler")
    common(run)
    run.add_argument("--sampler", choices=SAMPLERS)
    cmp_ = sub.add_parser("compare", help="run all three samplers on one case")
    common(cmp_)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cs = _apply_overrides(_load_case(args.case), args)
        if args.command == "run":
            result = run_case(cs, args.out)
            print(format_report(result.report), end="")
            print(f"Wall time: {result.wall_time:.2f} s")
            if result.report.error:
                print(f"error: {result.report.error}", file=sys.stderr)
                return 1
        else:
            results = compare(cs, args.out)
            print(format_comparison({k: r.report for k, r in results.items()}), end="")
            failed = [k for k, r in results.items() if r.report.error]
            if failed:
                print(f"error: sampler(s) failed: {', '.join(failed)}", file=sys.stderr)
                return 1
    except (InvalidInputError, NumericalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
