"""
Closed-form subcommands: `moments` and `dyck`.
"""

import argparse

import pandas as pd

from src.handlers.arguments import CommandOutput, add_rank_arguments, check_rank, parse_orders
from src.models.reports import MomentFormulaResult
from src.services import formula_service, wick_oracle_service
from src.services.combinatorics_service import InvalidCombinatorialArgumentError, catalan
from src.utils.config_loader import config
from src.utils.logger import logger
from src.utils.serialization import dump_csv, dump_document


def _moment(order: int, m: int, k: int, hahn_prefactor: str) -> MomentFormulaResult:
    if order % 2:
        raise InvalidCombinatorialArgumentError(f"moment orders must be even, got {order}")
    n = order // 2
    if n == 4:
        value = formula_service.eighth_moment_limit(m, k, hahn_prefactor)
        return MomentFormulaResult(order=order, value=value, regime=formula_service.classify_regime(m, k))
    return formula_service.moment_result(n, m, k)


def handle_moments(args: argparse.Namespace) -> CommandOutput:
    """
    Closed-form limit moments at (m, k) with their regime tag.

    Example:
        embedded-ensembles moments --m 12 --k 4
    """
    check_rank(args.m, args.k)
    prefactor = args.hahn_prefactor or str(config.get("formulas.hahn_prefactor", "corrected"))
    results = [_moment(order, args.m, args.k, prefactor) for order in args.orders]
    logger.info(f"Closed-form moments at m={args.m}, k={args.k}: orders {args.orders}")

    if args.format == "csv":
        frame = pd.DataFrame(
            [
                {
                    "order": r.order,
                    "num": r.value.numerator,
                    "den": r.value.denominator,
                    "approx": float(r.value),
                    "regime": r.regime,
                }
                for r in results
            ]
        )
        return CommandOutput(dump_csv(frame))

    document = {
        "command": "moments",
        "m": args.m,
        "k": args.k,
        "regime": formula_service.classify_regime(args.m, args.k),
        "hahn_prefactor": prefactor,
        "moments": results,
        "gaussian_endpoint": {r.order: formula_service.gaussian_moment(r.order // 2) for r in results},
        "semicircle": {r.order: formula_service.semicircle_moment(r.order // 2) for r in results},
    }
    if args.m >= 1:
        document["kink_points"] = {
            r.order: formula_service.kink_points(args.m, r.order // 2) for r in results if r.order >= 4
        }
    return CommandOutput(dump_document(document))


def handle_dyck(args: argparse.Namespace) -> CommandOutput:
    """Dyck words of semilength n, their Catalan count and the non-crossing pairings they encode."""
    n = args.n
    if n < 0:
        raise wick_oracle_service.InvalidPairingOrderError(f"n must be nonnegative, got {n}")
    count = catalan(n)
    document: dict = {"command": "dyck", "n": n, "catalan": count}
    document["words"] = (
        [str(w) for w in wick_oracle_service.dyck_words(n)] if count <= args.max_words else None
    )

    if 1 <= n and 2 * n <= config.get_int("oracle.max_pairing_slots", 12):
        translations = []
        for pairing in wick_oracle_service.non_crossing_pairings(2 * n):
            cycles = wick_oracle_service.pairing_to_cycles(pairing)
            translations.append(
                {
                    "pairing": str(pairing),
                    "cycles": str(cycles),
                    "dyck": str(wick_oracle_service.cycle_to_dyck(cycles)),
                }
            )
        document["non_crossing_count"] = len(translations)
        document["translations"] = translations
    return CommandOutput(dump_document(document))


def register_formula_handlers(subparsers: argparse._SubParsersAction) -> None:
    """Register `moments` and `dyck` on the CLI's subparsers."""
    moments = subparsers.add_parser("moments", help="closed-form limit moments at (m, k)")
    add_rank_arguments(moments)
    moments.add_argument("--orders", type=parse_orders, default=[4, 6, 8], help="e.g. 4,6,8")
    moments.add_argument(
        "--hahn-prefactor",
        choices=formula_service.HAHN_PREFACTORS,
        default=None,
        help="variant of the Hahn term in the eighth moment",
    )
    moments.add_argument("--format", choices=("json", "csv"), default="json")
    moments.set_defaults(handler=handle_moments)

    dyck = subparsers.add_parser("dyck", help="Dyck words, Catalan numbers, non-crossing pairings")
    dyck.add_argument("--n", type=int, required=True, help="semilength")
    dyck.add_argument("--max-words", type=int, default=5000, help="omit the word list above this count")
    dyck.set_defaults(handler=handle_dyck)

    logger.debug("Formula handlers registered")
