"""
The `diagrams` subcommand.
"""

import argparse

from src.handlers.arguments import CommandOutput, check_rank
from src.services import diagram_service
from src.utils.logger import logger
from src.utils.serialization import dump_document


def handle_diagrams(args: argparse.Namespace) -> CommandOutput:
    """
    Per-class diagram report for one trace order.

    With --m/--k the optimal loop family, class limits and the assembled moment are added;
    with --l as well, each leading term is evaluated.
    """
    if (args.m is None) != (args.k is None):
        raise diagram_service.InfeasibleSystemError("--m and --k must be given together")
    if args.m is not None:
        check_rank(args.m, args.k)
    if args.l is not None and args.m is None:
        raise diagram_service.InfeasibleSystemError("--l needs --m and --k")

    report = diagram_service.diagram_report(args.order, args.m, args.k, args.l)
    logger.info(f"Diagram report for order {args.order}: {len(report['classes'])} classes")
    if args.format == "text":
        return CommandOutput(diagram_service.render_report(report))
    return CommandOutput(dump_document({"command": "diagrams", **report}))


def register_diagram_handlers(subparsers: argparse._SubParsersAction) -> None:
    diagrams = subparsers.add_parser("diagrams", help="particle-diagram analysis of one trace order")
    diagrams.add_argument("--order", type=int, required=True, choices=diagram_service.SUPPORTED_ORDERS)
    diagrams.add_argument("--m", type=int, default=None)
    diagrams.add_argument("--k", type=int, default=None)
    diagrams.add_argument("--l", type=int, default=None, help="evaluate leading terms at this level count")
    diagrams.add_argument("--format", choices=("json", "text"), default="json")
    diagrams.set_defaults(handler=handle_diagrams)
