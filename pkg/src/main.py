import argparse
import asyncio
import contextlib
import sys
from typing import List, Optional

from dotenv import load_dotenv

from experiments.config import KINDS, ExperimentConfig
from experiments.report import EXIT_ERROR
from experiments.runner import run_async
from utils.constants.colors import RESET, STATUS_COLORS
from utils.errors import MfsimError

load_dotenv(override=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mfsim",
        description="Simulate McKean-Vlasov systems with common noise and verify their identities")
    parser.add_argument("kind", choices=KINDS, help="Experiment to run")
    parser.add_argument("--config", required=True, help="Path of the JSON experiment config")
    parser.add_argument("--seed", type=int, default=None,
                        help="Override the config seed (unsigned 64-bit)")
    parser.add_argument("--out", default=None,
                        help="Output directory (default: config output, then DATA_DIR)")
    parser.add_argument("--threads", type=int, default=None,
                        help="Worker threads (default: config, then MFSIM_THREADS)")
    parser.add_argument("--progress", action="store_true", default=False,
                        help="Show progress over W paths")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig.from_file(args.config, kind=args.kind)
    if args.seed is not None:
        config = ExperimentConfig.from_dict({**config.echo(), "seed": args.seed})
    return config


def summarize(report) -> str:
    color = STATUS_COLORS[report.exit_status]
    lines = [f"{color}{report.kind} [{report.run_id}] exit {report.exit_status}{RESET}"]
    if report.error_code is not None:
        lines.append(f"  error {report.error_code}: {report.error_message}")
    for check in report.checks:
        lines.append(f"  {'pass' if check.passed else 'FAIL'}  {check.name}  {check.detail}")
    return "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
    except MfsimError as e:
        print(f"{STATUS_COLORS[EXIT_ERROR]}{e}{RESET}", file=sys.stderr)
        return EXIT_ERROR
    if args.threads is not None and args.threads < 1:
        print(f"--threads must be at least 1, got {args.threads}", file=sys.stderr)
        return EXIT_ERROR

    report = asyncio.run(run_async(config, threads=args.threads, out=args.out,
                                   progress=args.progress))
    print(summarize(report))
    return report.exit_status


if __name__ == "__main__":
    with contextlib.suppress(KeyboardInterrupt):
        sys.exit(main())
