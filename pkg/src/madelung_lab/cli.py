"""Command-line entry point: ``madelung-lab run <config>`` and ``madelung-lab report <dir>``."""
from __future__ import annotations

import argparse
import logging
import sys

from . import runner


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="madelung-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a YAML config")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out-dir", default=None, help="run directory (default runs/<experiment>-seed<seed>)")
    p_run.add_argument(
        "--tolerance-scale",
        type=float,
        default=1.0,
        help="multiply every tolerance (debugging only; reports keep raw residuals)",
    )

    p_rep = sub.add_parser("report", help="summarize a run directory")
    p_rep.add_argument("run_dir")
    p_rep.add_argument("--gnuplot", action="store_true", help="also write gnuplot .dat files")

    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "run":
        code, out = runner.run(args.config, args.seed, args.out_dir, args.tolerance_scale)
        if out is not None:
            print((out / "report.txt").read_text(), end="")
            print(f"run directory: {out}")
        return code
    try:
        print(runner.report(args.run_dir, args.gnuplot), end="")
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return runner.EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
