"""
Command-line entry point for the embedded ensembles toolkit.

Registers the subcommand handlers on an argparse parser, routes logging to stderr so stdout
carries only results, and maps domain failures to exit statuses: 2 for invalid input, 3 for
budget overruns, 1 for a failed verification suite.
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from src.handlers.diagram_handler import register_diagram_handlers
from src.handlers.formula_handler import register_formula_handlers
from src.handlers.simulation_handler import register_simulation_handlers
from src.handlers.verification_handler import register_verification_handlers
from src.utils.errors import EmbeddedEnsembleError
from src.utils.logger import logger, route_console_to


def build_parser() -> argparse.ArgumentParser:
    """Create the parser and register every subcommand."""
    parser = argparse.ArgumentParser(
        prog="embedded-ensembles",
        description="Embedded random matrix ensembles: moments, exact oracles and particle diagrams",
    )
    parser.add_argument("--budget", type=int, default=None, help="cap on oracle operator applications")
    parser.add_argument("--output", type=Path, default=None, help="write the result here instead of stdout")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    subparsers = parser.add_subparsers(dest="command", required=True)

    register_formula_handlers(subparsers)
    register_simulation_handlers(subparsers)
    register_diagram_handlers(subparsers)
    register_verification_handlers(subparsers)
    return parser


def _write(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text, encoding="utf-8", newline="\n")
    logger.info(f"Wrote {output}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv, run one subcommand and return its exit status.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])

    Returns:
        0 on success, 1 for a failed verify suite, 2 for invalid input, 3 for budget overruns
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse has already printed usage or help
        return int(e.code or 0)

    route_console_to(sys.stderr, args.log_level)
    if args.budget is not None and args.budget < 1:
        logger.error("--budget must be positive")
        print("error: --budget must be positive", file=sys.stderr)
        return 2

    try:
        result = args.handler(args)
    except EmbeddedEnsembleError as e:
        logger.error(f"{args.command} failed: {e.message}")
        print(f"error: {e.message}", file=sys.stderr)
        return e.exit_status

    _write(result.text, args.output)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
