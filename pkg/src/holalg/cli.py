"""Command line entry point: ``holalg run <workspace|paper:NAME> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .workspace import (
    RunConfig,
    SchemaError,
    exit_code,
    load_workspace,
    report_json,
    report_text,
    run_workspace,
)


def _quad(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxM, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holalg", description="Batch verification of workspace checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run every check of a workspace")
    run.add_argument("workspace", help="workspace file, or a built-in preset such as paper:NxN")
    run.add_argument("--report", choices=("text", "json"), default="text")
    run.add_argument("--out", type=Path, help="write the report here instead of standard output")
    run.add_argument("--seed", type=int, default=0, help="seed for random-point comparisons")
    run.add_argument("--tol", type=float, help="relative tolerance for numeric comparisons")
    run.add_argument("--quad", type=_quad, help="quadrature resolution NxM, overriding the workspace")
    run.add_argument("--jobs", type=int, default=1, help="run checks on this many threads")
    run.add_argument("--timings", action="store_true",
                     help="record wall time per check (makes reports non-reproducible)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(seed=args.seed, tol=args.tol, quad=args.quad, jobs=max(1, args.jobs),
                    timings=args.timings)
    try:
        ws = load_workspace(args.workspace)
    except SchemaError as exc:
        print(f"schema error at {exc}", file=sys.stderr)
        return 2
    results = run_workspace(ws, cfg)
    if args.report == "json":
        text = json.dumps(report_json(results, cfg), indent=2, sort_keys=False) + "\n"
    else:
        text = report_text(results, ws.source) + "\n"
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return exit_code(results)


if __name__ == "__main__":
    sys.exit(main())
