"""
Monte Carlo subcommands: `simulate` and `density`.

Both draw every realisation from its own (seed, sample index) stream, so output bytes depend
only on the flags and never on --workers.
"""

import argparse

from src.handlers.arguments import (
    CommandOutput,
    add_ensemble_arguments,
    params_from_args,
    parse_orders,
    seed_from_args,
)
from src.models.fock import Statistics
from src.services import formula_service, spectral_service
from src.utils.logger import logger
from src.utils.serialization import dump_csv, dump_document


def handle_simulate(args: argparse.Namespace) -> CommandOutput:
    """Ratio-of-means moment estimates with standard errors, next to the l -> infinity limits."""
    params = params_from_args(args)
    seed = seed_from_args(args)
    report = spectral_service.estimate_moments(params, args.orders, args.samples, seed, args.workers)

    limits = {}
    if params.statistics is Statistics.FERMIONIC and params.beta == 2:
        for order in args.orders:
            if order in (4, 6, 8):
                limits[order] = formula_service.nth_moment_limit(order // 2, params.m, params.k)
    for estimate in report.estimates:
        logger.info(f"beta_{estimate.order} = {estimate.estimate:.6f} +/- {estimate.std_error:.6f}")
    return CommandOutput(
        dump_document(
            {
                "command": "simulate",
                "report": report,
                "lambda0": (
                    spectral_service.lambda0(params.m, params.k, params.l)
                    if params.statistics is Statistics.FERMIONIC
                    else None
                ),
                "second_moment_per_state": spectral_service.second_moment_per_state(params),
                "limit_moments": limits,
            }
        )
    )


def handle_density(args: argparse.Namespace) -> CommandOutput:
    """Histogram CSV (bin_lo, bin_hi, height, overlay_height) of the pooled spectrum."""
    params = params_from_args(args)
    seed = seed_from_args(args)
    histogram = spectral_service.empirical_density(
        params, args.samples, args.bins, seed, args.workers, overlay=not args.no_overlay
    )
    if histogram.overlay_heights is not None:
        logger.info(f"L1 distance to the semicircle: {spectral_service.l1_distance(histogram):.6f}")
    return CommandOutput(dump_csv(histogram.to_frame()))


def register_simulation_handlers(subparsers: argparse._SubParsersAction) -> None:
    """Register `simulate` and `density` on the CLI's subparsers."""
    simulate = subparsers.add_parser("simulate", help="Monte Carlo moments of the level density")
    add_ensemble_arguments(simulate, default_samples=200)
    simulate.add_argument("--orders", type=parse_orders, default=[4, 6, 8], help="even orders, e.g. 4,6,8")
    simulate.set_defaults(handler=handle_simulate)

    density = subparsers.add_parser("density", help="pooled eigenvalue histogram with semicircle overlay")
    add_ensemble_arguments(density, default_samples=50)
    density.add_argument("--bins", type=int, default=40)
    density.add_argument("--no-overlay", action="store_true", help="skip the semicircle overlay column")
    density.set_defaults(handler=handle_density)

    logger.debug("Simulation handlers registered")
