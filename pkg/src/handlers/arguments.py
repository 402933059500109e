"""
Shared argument helpers for the subcommand handlers.
"""

import argparse
from typing import NamedTuple, Optional

from src.models.ensemble import EnsembleParams
from src.models.fock import Statistics
from src.services.ensemble_service import InvalidEnsembleParamsError, validate_params
from src.utils.config_loader import config


class CommandOutput(NamedTuple):
    """What a handler hands back to the CLI: the result text and the exit status."""

    text: str
    status: int = 0


def parse_orders(text: str) -> list[int]:
    """'4,6,8' -> [4, 6, 8]."""
    try:
        orders = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"orders must be comma-separated integers, got {text!r}") from None
    if not orders:
        raise argparse.ArgumentTypeError("at least one order is required")
    return orders


def default_seed() -> int:
    return config.get_int("rng.default_seed", 20240607)


def check_rank(m: int, k: int) -> None:
    """
    Raises:
        InvalidEnsembleParamsError: If k < 0 or k exceeds m
    """
    if k < 0:
        raise InvalidEnsembleParamsError(f"k must be nonnegative, got {k}")
    if k > m:
        raise InvalidEnsembleParamsError(f"k exceeds m ({k} > {m})")


def add_rank_arguments(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--m", type=int, required=required, help="particle count")
    parser.add_argument("--k", type=int, required=required, help="interaction rank")


def add_ensemble_arguments(parser: argparse.ArgumentParser, default_samples: int) -> None:
    """Flags describing one ensemble point plus its sampling controls."""
    parser.add_argument("--beta", type=int, default=2, choices=(1, 2, 4), help="Dyson index")
    parser.add_argument("--l", type=int, required=True, help="number of single-particle levels")
    add_rank_arguments(parser)
    parser.add_argument(
        "--statistics",
        choices=[s.value for s in Statistics],
        default=Statistics.FERMIONIC.value,
    )
    parser.add_argument("--v0", type=float, default=None, help="coupling scale")
    parser.add_argument("--samples", type=int, default=default_samples)
    parser.add_argument("--seed", type=int, default=None, help="master seed (default rng.default_seed)")
    parser.add_argument("--workers", type=int, default=None, help="threads for per-sample work")


def params_from_args(args: argparse.Namespace) -> EnsembleParams:
    """
    Build and validate EnsembleParams from parsed flags.

    Raises:
        InvalidEnsembleParamsError: With every violated constraint in the message
    """
    v0: Optional[float] = args.v0
    params = EnsembleParams(
        beta=args.beta,
        k=args.k,
        m=args.m,
        l=args.l,
        statistics=Statistics(args.statistics),
        v0=v0 if v0 is not None else config.get_float("ensemble.default_v0", 1.0),
    )
    validate_params(params)
    return params


def seed_from_args(args: argparse.Namespace) -> int:
    return args.seed if args.seed is not None else default_seed()
