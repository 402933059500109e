"""
Exact-arithmetic subcommands: `verify` and `exact`.

Both honour the global --budget flag, which caps oracle operator applications.
"""

import argparse
from fractions import Fraction
from typing import Optional

from src.handlers.arguments import CommandOutput, check_rank
from src.models.fock import Statistics
from src.services import ensemble_service, fock_service, verification_service, wick_oracle_service
from src.utils.config_loader import config
from src.utils.database import check_db_connection, get_db, init_db
from src.utils.logger import logger
from src.utils.serialization import dump_document


def _run_suite(max_dim: Optional[int], budget: Optional[int], use_cache: bool) -> list:
    if not use_cache:
        return verification_service.run_suite(max_dim, budget)
    init_db()
    if not check_db_connection():
        logger.warning("Trace cache unreachable, running without it")
        return verification_service.run_suite(max_dim, budget)
    with get_db() as db:
        return verification_service.run_suite(max_dim, budget, db=db)


def handle_verify(args: argparse.Namespace) -> CommandOutput:
    """
    Run the identity suite and report every check.

    Returns status 0 only when all checks pass, 1 otherwise.
    """
    use_cache = config.get_bool("database.cache_exact_traces", True) and not args.no_cache
    results = _run_suite(args.max_dim, args.budget, use_cache)
    passed = verification_service.suite_passed(results)
    if passed:
        logger.info(f"All {len(results)} checks passed")
    else:
        failed = [r.name for r in results if not r.passed]
        logger.error(f"Verification failed: {', '.join(failed)}")
    document = {"command": "verify", "passed": passed, "checks": results}
    return CommandOutput(dump_document(document), 0 if passed else 1)


def handle_exact(args: argparse.Namespace) -> CommandOutput:
    """Exact ensemble-averaged trace of H^order and its normalised moment at finite l."""
    check_rank(args.m, args.k)
    statistics = Statistics(args.statistics)
    trace = wick_oracle_service.exact_even_trace(
        args.l, args.m, args.k, args.order, args.beta, statistics, args.strategy, args.budget
    )
    second = wick_oracle_service.exact_even_trace(
        args.l, args.m, args.k, 2, args.beta, statistics, args.strategy, args.budget
    )
    dimension = fock_service.basis_size(args.l, args.m, statistics)
    n = args.order // 2
    document = {
        "command": "exact",
        "l": args.l,
        "m": args.m,
        "k": args.k,
        "beta": args.beta,
        "statistics": statistics.value,
        "order": args.order,
        "dimension": dimension,
        "trace": trace,
        "second_trace": second,
    }
    strategy = wick_oracle_service.resolve_strategy(args.strategy, args.beta, statistics)
    document["strategy"] = strategy
    if strategy == "reference_state":
        document["reference_state"] = ensemble_service.reference_state(args.l, args.m, statistics)
    if second:
        document["moment"] = Fraction(trace * dimension ** (n - 1), second**n)
    return CommandOutput(dump_document(document))


def register_verification_handlers(subparsers: argparse._SubParsersAction) -> None:
    """Register `verify` and `exact` on the CLI's subparsers."""
    verify = subparsers.add_parser("verify", help="exact identity suite; exit 0 iff every check passes")
    verify.add_argument("--max-dim", type=int, default=None, help="largest basis used by oracle checks")
    verify.add_argument("--no-cache", action="store_true", help="do not read or write the trace cache")
    verify.set_defaults(handler=handle_verify)

    exact = subparsers.add_parser("exact", help="exact Wick-oracle trace and moment at finite l")
    exact.add_argument("--l", type=int, required=True)
    exact.add_argument("--m", type=int, required=True)
    exact.add_argument("--k", type=int, required=True)
    exact.add_argument("--order", type=int, required=True, help="even trace order")
    exact.add_argument("--beta", type=int, default=2, choices=(1, 2))
    exact.add_argument("--statistics", choices=[s.value for s in Statistics], default=Statistics.FERMIONIC.value)
    exact.add_argument("--strategy", choices=("auto", "reference_state", "full_basis"), default=None)
    exact.set_defaults(handler=handle_exact)

    logger.debug("Verification handlers registered")
