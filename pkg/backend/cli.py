"""
Command-line entry point for glassbound.

Usage:
    python -m backend.cli report --spec fixtures/glass_example.json --k 2
    python -m backend.cli blocks --spec fixtures/glass_example.json --steps 1000000 --block-range 20:80

Artifacts go to stdout or --out; logs go to stderr.
"""
import argparse
import logging
import sys
from dataclasses import dataclass
from typing import Optional, Tuple

from shared.config import config
from shared.constants import COMMANDS, FORMATS
from shared.exceptions import GlassBoundError, UsageError
from backend.commands import handlers
from backend.utils import parse_block_range, parse_list, standardize_error_report

logger = logging.getLogger('glassbound.cli')


@dataclass
class RunConfig:
    """Everything one CLI invocation needs."""
    command: str
    spec_path: Optional[str] = None
    starting_edge: Optional[str] = None
    max_cycle_len: Optional[int] = None
    k: Optional[int] = None
    steps: Optional[int] = None
    seed: int = 0
    block_len: Optional[int] = None
    block_range: Optional[Tuple[int, int]] = None
    format: Optional[str] = None
    out: Optional[str] = None
    threads: int = 1
    counts_path: Optional[str] = None
    forbid: Tuple[str, ...] = ()
    words: Tuple[str, ...] = ()
    checkpoints: Tuple[int, ...] = ()
    exact: bool = False
    verbose: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format is not None and self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}")
        if self.k is not None and self.k < 1:
            raise UsageError("--k must be at least 1")
        if self.threads < 1:
            raise UsageError("--threads must be at least 1")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="glassbound",
        description="Entropy bounds for Glass networks from refined transition graphs.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--spec", dest="spec_path", help="network document (JSON)")
    parser.add_argument("--edge", dest="starting_edge", help="starting edge, e.g. 1111>1110")
    parser.add_argument("--max-cycle-len", type=int, help="bound M on first-return cycle length")
    parser.add_argument("--k", type=int, help="refinement level (highest level for refine/report)")
    parser.add_argument("--steps", type=int, help="wall transitions to simulate")
    parser.add_argument("--seed", type=int, default=0, help="seed for start-point sampling")
    blocks = parser.add_mutually_exclusive_group()
    blocks.add_argument("--block-len", type=int, help="single block length")
    blocks.add_argument("--block-range", help="inclusive block-length range A:B")
    parser.add_argument("--checkpoints", help="comma-separated step counts for a growth curve")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--out", help="artifact path (default stdout)")
    parser.add_argument("--threads", type=int, help="worker processes (default GLASSBOUND_THREADS or CPU count)")
    parser.add_argument("--counts", dest="counts_path", help="(n, count) CSV to fit instead of simulating")
    parser.add_argument("--forbid", help="comma-separated cycle words to forbid (refine)")
    parser.add_argument("--words", help="comma-separated cycle words whose cones to compute (cones)")
    parser.add_argument("--exact", action="store_true", help="simulate with exact rationals")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def config_from_args(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        spec_path=args.spec_path,
        starting_edge=args.starting_edge,
        max_cycle_len=args.max_cycle_len,
        k=args.k,
        steps=args.steps,
        seed=args.seed,
        block_len=args.block_len,
        block_range=parse_block_range(args.block_range) if args.block_range else None,
        format=args.format,
        out=args.out,
        threads=args.threads if args.threads is not None else config.get_threads(),
        counts_path=args.counts_path,
        forbid=parse_list(args.forbid),
        words=parse_list(args.words),
        checkpoints=parse_list(args.checkpoints, int),
        exact=args.exact,
        verbose=args.verbose,
    )


def run(run_config: RunConfig) -> int:
    """
    Run one command.

    Returns:
        Exit code: 0 on success, the error's code otherwise
    """
    logger.debug(f"Running {run_config.command} with {run_config}")
    try:
        return handlers[run_config.command](run_config)
    except GlassBoundError as e:
        return standardize_error_report(e, stage=run_config.command)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else config.LOG_LEVEL,
        format=config.LOG_FORMAT,
        stream=sys.stderr,
    )
    try:
        run_config = config_from_args(args)
    except GlassBoundError as e:
        return standardize_error_report(e)
    return run(run_config)


if __name__ == "__main__":
    sys.exit(main())
