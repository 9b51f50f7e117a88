"""Command-line entry point: qlattice {lattice,moments,tilde,amenability} --spec BACKEND.json."""

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import AmenabilityTest, Command, OutputFormat, RunConfig, TildeMethod
from .orchestrator import EXIT_USAGE, run

logger = logging.getLogger(__name__)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--spec", type=Path, required=True, help="Backend descriptor JSON file")
    parser.add_argument("--tol", type=float, default=1e-9, help="Rank tolerance (default: 1e-9)")
    parser.add_argument("--seed", type=int, default=0, help="Seed for randomized checks (default: 0)")
    parser.add_argument("--out", type=Path, help="Report file (default: stdout)")
    parser.add_argument("--threads", type=int, help="Worker threads (default: $QLATTICE_THREADS or 1)")
    parser.add_argument("--verbose", action="store_true", help="Enable debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlattice",
        description="Standard-invariant lattices, moment tables and amenability tests for quantum group corepresentations",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    lattice = commands.add_parser(Command.LATTICE.value, help="Build and verify the lattice")
    _add_common(lattice)
    lattice.add_argument("--bound", type=int, help="Largest cell index (default: 5 for n=2, 4 for n=3, else 3)")
    lattice.add_argument(
        "--format",
        default=OutputFormat.JSON.value,
        choices=[f.value for f in OutputFormat],
        help="Report format; dot writes the row-0 Bratteli diagram (default: json)",
    )

    moments = commands.add_parser(Command.MOMENTS.value, help="Tabulate character moments")
    _add_common(moments)
    moments.add_argument("--max-len", type=int, default=6, help="Longest word (default: 6)")

    tilde = commands.add_parser(Command.TILDE.value, help="Moments of the free product with a Haar unitary")
    _add_common(tilde)
    tilde.add_argument("--max-len", type=int, default=6, help="Longest word (default: 6)")
    tilde.add_argument(
        "--method",
        default=TildeMethod.ALL.value,
        choices=[m.value for m in TildeMethod],
        help="Computation method; all cross-checks every applicable one (default: all)",
    )

    amenability = commands.add_parser(Command.AMENABILITY.value, help="Estimate amenability")
    _add_common(amenability)
    amenability.add_argument(
        "--test",
        default=AmenabilityTest.KESTEN.value,
        choices=[t.value for t in AmenabilityTest],
        help="Kesten test on the quantum group or the lattice test (default: kesten)",
    )
    amenability.add_argument("--kmax", type=int, default=12, help="Highest moment order (default: 12)")
    amenability.add_argument("--margin", type=float, default=0.02, help="Relative verdict margin (default: 0.02)")
    amenability.add_argument("--strict", action="store_true", help="Exit 3 on an inconclusive verdict")

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        backend_path=args.spec,
        bound=getattr(args, "bound", None),
        k_max=getattr(args, "kmax", 12),
        max_len=getattr(args, "max_len", 6),
        tol=args.tol,
        margin=getattr(args, "margin", 0.02),
        seed=args.seed,
        method=getattr(args, "method", TildeMethod.ALL.value),
        test=getattr(args, "test", AmenabilityTest.KESTEN.value),
        format=getattr(args, "format", OutputFormat.JSON.value),
        output_path=args.out,
        strict=getattr(args, "strict", False),
        threads=args.threads,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else 0

    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    cfg = config_from_args(args)
    logger.debug(f"Run config: {cfg.to_dict()}")
    try:
        return asyncio.run(run(cfg))
    except KeyboardInterrupt:
        logger.info("Interrupted")
        return 130
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
