"""Command-line entry point: ``zagier-check <stage> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .pipeline import STAGES, PipelineConfig, Pipeline, StageFailure

SUBCOMMANDS = STAGES + ("all",)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zagier-check",
        description="Numerical check of L(E,2) against elliptic dilogarithm regulators for a CM curve over Q(sqrt 5).",
    )
    parser.add_argument("stage", choices=SUBCOMMANDS, help="stage to run (earlier stages run as needed)")
    parser.add_argument("--precision-digits", type=int, default=100, metavar="D")
    parser.add_argument("--coeff-bound", type=int, default=30000, metavar="N", help="use a_n for n <= N")
    parser.add_argument("--lll-scale", type=int, default=60, metavar="S", help="archimedean rows scaled by 10^S")
    parser.add_argument("--divisors-from-table2", action="store_true", help="skip lattice reduction")
    parser.add_argument("--skip-lvalue", action="store_true")
    parser.add_argument("--lvalue-precision-digits", type=int, default=None, metavar="D")
    parser.add_argument("--mode", choices=("golden", "self"), default="golden")
    parser.add_argument("--out", type=Path, default=Path("out"), help="artifact directory")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args) -> PipelineConfig:
    if args.lll_scale >= args.precision_digits - 30:
        raise SystemExit("--lll-scale must be below --precision-digits - 30")
    return PipelineConfig(
        precision_digits=args.precision_digits,
        coeff_bound=args.coeff_bound,
        lll_scale=args.lll_scale,
        divisors_from_table2=args.divisors_from_table2,
        skip_lvalue=args.skip_lvalue,
        out=args.out,
        mode=args.mode,
        lvalue_precision_digits=args.lvalue_precision_digits,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    pipe = Pipeline(config_from_args(args))
    stage = "compare" if args.stage == "all" else args.stage
    try:
        pipe.run(stage)
    except StageFailure as exc:
        print(f"FAILED {exc}", file=sys.stderr)
        return 2
    summary = {"stage": args.stage, "artifacts": sorted(pipe.artifacts), "timings_seconds": pipe.timings}
    if "report" in pipe.artifacts:
        rep = pipe.artifacts["report"]
        summary["zero_determinants"] = len(rep["zero_set"])
        summary["ratio_multiset"] = rep["ratio_multiset"]
        summary["l_value"] = rep["l_value"]
    print(json.dumps(summary, indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
