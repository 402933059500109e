"""
Spectral service.

Monte Carlo moments of the level density and pooled-eigenvalue histograms with a
semicircle overlay.

Each sample is independent (its couplings come from its own Philox stream), so the
sample -> build -> eigensolve pipeline runs on a thread pool; results are reduced in
sample-index order so the output does not depend on the number of workers.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.linalg

from src.models.ensemble import EnsembleParams, HermitianMatrix
from src.models.fock import Statistics
from src.models.reports import DensityHistogram, MomentEstimate, MomentReport
from src.services import ensemble_service, fock_service, wick_oracle_service
from src.services.combinatorics_service import binomial
from src.utils.config_loader import config
from src.utils.errors import EmbeddedEnsembleError
from src.utils.logger import logger


class InsufficientSamplesError(EmbeddedEnsembleError):
    """Raised when too few samples are requested for an error estimate."""


class EigensolverError(EmbeddedEnsembleError):
    """Raised when the dense Hermitian eigensolver fails."""


def eigenvalues(matrix: HermitianMatrix) -> np.ndarray:
    """
    Real spectrum of a Hermitian matrix, ascending.

    Raises:
        EigensolverError: If LAPACK does not converge or the input is not finite
    """
    try:
        return scipy.linalg.eigvalsh(matrix.data)
    except (np.linalg.LinAlgError, ValueError) as e:
        logger.error(f"Eigensolver failed on a {matrix.dimension}x{matrix.dimension} matrix: {e}")
        raise EigensolverError(f"eigensolver failed: {e}") from e


def normalized_traces(spectrum: np.ndarray, orders: Iterable[int]) -> list[float]:
    """(1/N) * sum_i lambda_i**order for each order."""
    size = len(spectrum)
    return [float(np.sum(spectrum**order) / size) for order in orders]


def realization_traces(matrix: HermitianMatrix, orders: Sequence[int]) -> list[float]:
    """
    Normalised traces of one realisation from a single eigendecomposition.

    Example:
        realization_traces(HermitianMatrix(np.diag([1.0, -1.0])), [4])  # [1.0]
    """
    return normalized_traces(eigenvalues(matrix), orders)


def lambda0(m: int, k: int, l: int) -> int:
    """
    C(m,k) * C(l-m+k,k), the number of k-body moves out of any m-particle state.

    Equals (1/N) tr(H^2) at v0 = 1 for fermions; see second_moment_per_state for bosons.
    """
    if not 0 <= k <= m <= l:
        raise ensemble_service.InvalidEnsembleParamsError(
            f"the fermionic move count needs 0 <= k <= m <= l, got m={m}, k={k}, l={l}"
        )
    return binomial(m, k) * binomial(l - m + k, k)


def second_moment_per_state(params: EnsembleParams) -> float:
    """
    Ensemble average of (1/N) tr(H^2) at v0 = 1.

    Fermions give lambda0. Bosonic states do not all have the same number of moves and the
    amplitudes carry occupation factors, so the bosonic value is the exact oracle trace
    over the full basis divided by its size.

    Example:
        second_moment_per_state(EnsembleParams(beta=2, k=1, m=3, l=2, statistics=Statistics.BOSONIC))  # 12.0
    """
    if params.statistics is Statistics.FERMIONIC:
        return float(lambda0(params.m, params.k, params.l))
    ensemble_service.validate_params(params)
    beta = params.beta if params.beta in (1, 2) else 2
    trace = wick_oracle_service.exact_even_trace(
        params.l, params.m, params.k, 2, beta=beta, statistics=params.statistics, strategy="full_basis"
    )
    return trace / fock_service.basis_size(params.l, params.m, params.statistics)


def semicircle_radius(params: EnsembleParams) -> float:
    """R = 2 v0 sqrt(second moment per state)."""
    return 2.0 * params.v0 * float(np.sqrt(second_moment_per_state(params)))


def semicircle_density(x: np.ndarray | float, radius: float) -> np.ndarray:
    """2/(pi R^2) sqrt(R^2 - x^2) on [-R, R], zero outside."""
    x = np.asarray(x, dtype=float)
    inside = np.clip(radius * radius - x * x, 0.0, None)
    return 2.0 / (np.pi * radius * radius) * np.sqrt(inside)


def _semicircle_cdf(x: np.ndarray, radius: float) -> np.ndarray:
    u = np.clip(np.asarray(x, dtype=float) / radius, -1.0, 1.0)
    return 0.5 + (u * np.sqrt(1.0 - u * u) + np.arcsin(u)) / np.pi


def _workers(workers: Optional[int]) -> int:
    return max(1, workers if workers is not None else config.get_int("spectral.workers", 1))


def sample_spectra(
    params: EnsembleParams, samples: int, seed: int, workers: Optional[int] = None
) -> list[np.ndarray]:
    """
    Spectra of samples 0..samples-1 of a master seed, in sample-index order.

    Raises:
        InvalidEnsembleParamsError: Invalid params
        DimensionCapExceededError: If the basis exceeds ensemble.max_dimension
    """
    ensemble_service.validate_params(params)

    def one(index: int) -> np.ndarray:
        return eigenvalues(ensemble_service.sample_hamiltonian(params, seed, index))

    # Sample 0 builds the shared stencil before the pool starts
    first = one(0) if samples else None
    rest = range(1, samples)
    with ThreadPoolExecutor(max_workers=_workers(workers)) as executor:
        spectra = ([first] if first is not None else []) + list(executor.map(one, rest))
    logger.info(f"Diagonalised {samples} samples at beta={params.beta}, l={params.l}, m={params.m}, k={params.k}")
    return spectra


def _ratio_estimate(
    numerators: np.ndarray, denominators: np.ndarray, power: float, order: int
) -> MomentEstimate:
    """mean(X) / mean(Y)**power with a first-order delta-method standard error."""
    samples = len(numerators)
    x_mean = float(np.mean(numerators))
    y_mean = float(np.mean(denominators))
    estimate = x_mean / y_mean**power
    gradient = np.array([1.0 / y_mean**power, -power * x_mean / y_mean ** (power + 1)])
    covariance = np.cov(np.vstack([numerators, denominators]), ddof=1)
    variance = float(gradient @ covariance @ gradient) / samples
    return MomentEstimate(
        order=order,
        estimate=estimate,
        std_error=float(np.sqrt(max(variance, 0.0))),
        samples=samples,
        numerator_mean=x_mean,
        denominator_mean=y_mean,
    )


def estimate_moments(
    params: EnsembleParams,
    orders: Sequence[int],
    samples: int,
    seed: int,
    workers: Optional[int] = None,
    odd_orders: Sequence[int] = (1, 3),
) -> MomentReport:
    """
    Ratio-of-means moments beta_2n = mean(tr H^2n / N) / mean(tr H^2 / N)**n.

    Args:
        params: Ensemble parameters
        orders: Even orders 2n to estimate
        samples: Number of realisations (at least 2)
        seed: Master seed
        workers: Thread count (defaults to spectral.workers)
        odd_orders: Odd orders reported alongside as a zero-mean check

    Returns:
        MomentReport with one estimate per requested order

    Raises:
        InsufficientSamplesError: If samples < 2
    """
    if samples < 2:
        raise InsufficientSamplesError(f"need at least 2 samples for an error estimate, got {samples}")
    for order in orders:
        if order < 2 or order % 2:
            raise ensemble_service.InvalidEnsembleParamsError(f"moment orders must be even and >= 2, got {order}")

    every_order = sorted({2, *orders, *odd_orders})
    traces = np.array([normalized_traces(s, every_order) for s in sample_spectra(params, samples, seed, workers)])
    column = {order: traces[:, position] for position, order in enumerate(every_order)}
    second = column[2]
    if float(np.mean(second)) <= 0.0:
        raise InsufficientSamplesError("mean second trace is zero; moments are undefined")

    estimates = tuple(_ratio_estimate(column[o], second, o / 2, o) for o in orders)
    odd = tuple(_ratio_estimate(column[o], second, o / 2, o) for o in odd_orders)
    return MomentReport(params=params, seed=seed, samples=samples, estimates=estimates, odd_moments=odd)


def empirical_density(
    params: EnsembleParams,
    samples: int,
    bins: int,
    seed: int,
    workers: Optional[int] = None,
    overlay: bool = True,
) -> DensityHistogram:
    """
    Unit-normalised histogram of all eigenvalues pooled over samples.

    Edges are symmetric on [-span*R, span*R] with R from semicircle_radius and span from
    spectral.histogram_span, widened to the largest |eigenvalue| when any fall outside. The
    overlay is the semicircle of radius R averaged over each bin; it is a fair comparison
    only in the canonical domain 2k > m.

    Raises:
        InsufficientSamplesError: If samples < 1 or bins < 1
    """
    if samples < 1 or bins < 1:
        raise InsufficientSamplesError("need at least one sample and one bin")
    pooled = np.concatenate(sample_spectra(params, samples, seed, workers))
    radius = semicircle_radius(params)
    span = config.get_float("spectral.histogram_span", 1.2)
    largest = float(np.max(np.abs(pooled)))
    scale = radius if radius > 0 else largest or 1.0
    half_width = span * scale
    outside = int(np.sum(np.abs(pooled) > half_width))
    if outside:
        logger.warning(
            f"{outside} of {len(pooled)} eigenvalues lie beyond +/-{half_width:.4g}; "
            f"widening the histogram to +/-{largest:.4g}"
        )
        half_width = largest
    edges = np.linspace(-half_width, half_width, bins + 1)
    counts, _ = np.histogram(pooled, bins=edges)
    widths = np.diff(edges)
    heights = counts / (counts.sum() * widths)

    overlay_heights = None
    if overlay and radius > 0:
        if 2 * params.k <= params.m:
            logger.warning(f"Semicircle overlay at 2k <= m (m={params.m}, k={params.k}) is outside the canonical domain")
        cdf = _semicircle_cdf(edges, radius)
        overlay_heights = np.diff(cdf) / widths

    return DensityHistogram(
        edges=edges,
        counts=counts,
        heights=heights,
        radius=radius if overlay and radius > 0 else None,
        overlay_heights=overlay_heights,
    )


def l1_distance(histogram: DensityHistogram) -> float:
    """sum |height - overlay| * width."""
    if histogram.overlay_heights is None:
        raise EmbeddedEnsembleError("histogram has no overlay to compare against")
    return float(np.sum(np.abs(histogram.heights - histogram.overlay_heights) * histogram.widths))
