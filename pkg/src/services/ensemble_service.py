"""
Ensemble service.

Random k-body couplings under the beta = 1/2/4 symmetry constraints, their exact
second-moment kernel, and Hamiltonian assembly on a basis.

Sampling uses numpy's counter-based Philox generator. Sample s of master seed X draws
from SeedSequence(entropy=X, spawn_key=(s,)), so any subset of samples can be produced
in any order (or on any thread) with bit-identical results.
"""

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Optional

import numpy as np

from src.models.ensemble import CouplingKernel, EnsembleParams, HermitianMatrix, PairMap
from src.models.fock import KILLED, Basis, IndexTuple, OccupationState, Statistics
from src.services import fock_service
from src.utils.config_loader import config
from src.utils.errors import EmbeddedEnsembleError
from src.utils.logger import logger


class InvalidEnsembleParamsError(EmbeddedEnsembleError):
    """Raised for parameters outside 0 <= k <= m <= l or unsupported symmetry classes."""


class DimensionCapExceededError(EmbeddedEnsembleError):
    """Raised when a Hamiltonian would exceed the configured dimension cap."""

    exit_status = 3


def validate_params(params: EnsembleParams) -> None:
    """
    Raise on invalid parameters.

    Raises:
        InvalidEnsembleParamsError: With every reason joined into the message
    """
    errors = params.validation_errors()
    if errors:
        raise InvalidEnsembleParamsError("; ".join(errors), {"errors": errors})


@lru_cache(maxsize=64)
def k_tuples(l: int, k: int) -> tuple[IndexTuple, ...]:
    """All increasing k-tuples over levels 1..l in lexicographic order."""
    return tuple(combinations(range(1, l + 1), k))


def rng_for(seed: int, sample_index: int = 0) -> np.random.Generator:
    """Philox stream for one sample of a master seed."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(sample_index,))
    return np.random.Generator(np.random.Philox(sequence))


# ===== SECOND-MOMENT KERNEL =====


def _half(state: IndexTuple, pair_map: PairMap) -> int:
    """0 if the state precedes its sigma image lexicographically (or equals it), else 1."""
    return 0 if tuple(state) <= pair_map.apply(state) else 1


def symplectic_sign(
    j: IndexTuple, i: IndexTuple, pair_map: PairMap, m: Optional[int] = None
) -> int:
    """
    Sign of the beta=4 pairing for the tuple pair (j, i).

    A cell (mu, nu) is blue when mu and nu lie in the same half of the basis (each half
    collects the states that precede their sigma image, or follow it) and red otherwise.
    The sign is +1 when every m-particle cell holding a†_j a_i is blue, -1 when every such
    cell is red, and 0 (a symplectic zero) when the pair sits in cells of both colours.

    Args:
        j: Creation tuple
        i: Annihilation tuple
        pair_map: The involution sigma
        m: Particle count of the cells (defaults to k, where no zeros occur)
    """
    k = len(j)
    m = k if m is None else m
    if m < k:
        raise InvalidEnsembleParamsError(f"k exceeds m ({k} > {m})")
    spectators = [x for x in range(1, pair_map.levels + 1) if x not in i and x not in j]
    colours = set()
    for rest in combinations(spectators, m - k):
        nu = tuple(sorted(rest + tuple(i)))
        mu = tuple(sorted(rest + tuple(j)))
        colours.add(_half(mu, pair_map) == _half(nu, pair_map))
        if len(colours) == 2:
            return 0
    if colours == {True}:
        return 1
    if colours == {False}:
        return -1
    return 0


def second_moment_kernel(
    beta: int,
    j: IndexTuple,
    i: IndexTuple,
    jp: IndexTuple,
    ip: IndexTuple,
    pair_map: Optional[PairMap] = None,
    m: Optional[int] = None,
) -> int:
    """
    Exact average of v(j, i) * v(j', i') at v0 = 1.

    delta(j,i') delta(i,j') + [beta=1] delta(j,j') delta(i,i')
    + [beta=4] sgn(j,i) delta(j, sigma(j')) delta(i, sigma(i'))

    Raises:
        InvalidEnsembleParamsError: For unknown beta, mismatched tuple orders, or beta=4
            without a pair map
    """
    if beta not in (1, 2, 4):
        raise InvalidEnsembleParamsError(f"beta must be 1, 2 or 4, got {beta}")
    if not len(j) == len(i) == len(jp) == len(ip):
        raise InvalidEnsembleParamsError("all four tuples must have the same order k")
    j, i, jp, ip = tuple(j), tuple(i), tuple(jp), tuple(ip)

    value = int(j == ip and i == jp)
    if beta == 1:
        value += int(j == jp and i == ip)
    elif beta == 4:
        if pair_map is None:
            raise InvalidEnsembleParamsError("beta=4 requires a pair map")
        if j == pair_map.apply(jp) and i == pair_map.apply(ip):
            value += symplectic_sign(j, i, pair_map, m)
    return value


# ===== SAMPLING =====


def independent_entry_count(params: EnsembleParams) -> int:
    """Independent random entries: diagonal pairs plus one per unordered off-diagonal pair."""
    tuples = len(k_tuples(params.l, params.k))
    return tuples + tuples * (tuples - 1) // 2


def sample_couplings(params: EnsembleParams, seed: int, sample_index: int = 0) -> CouplingKernel:
    """
    Draw one coupling kernel.

    beta=2: v(j,i) = conj(v(i,j)); off-diagonal pairs have real and imaginary parts of
    variance 1/2, diagonal pairs are real with variance 1.
    beta=1: real symmetric; off-diagonal variance 1, diagonal variance 2.

    Args:
        params: Ensemble parameters (beta must be 1 or 2)
        seed: Master seed
        sample_index: Which sample of the master seed to draw

    Returns:
        Immutable CouplingKernel scaled by v0

    Raises:
        InvalidEnsembleParamsError: Invalid params or beta=4
    """
    validate_params(params)
    if params.beta == 4:
        raise InvalidEnsembleParamsError("beta=4 coupling sampling is not supported")

    tuples = k_tuples(params.l, params.k)
    size = len(tuples)
    rng = rng_for(seed, sample_index)
    upper_rows, upper_cols = np.triu_indices(size, k=1)
    values = np.zeros((size, size), dtype=np.complex128)

    if params.beta == 2:
        diagonal = rng.standard_normal(size)
        parts = rng.standard_normal((len(upper_rows), 2)) / np.sqrt(2.0)
        off = parts[:, 0] + 1j * parts[:, 1]
        values[upper_rows, upper_cols] = off
        values[upper_cols, upper_rows] = np.conj(off)
    else:
        diagonal = np.sqrt(2.0) * rng.standard_normal(size)
        off = rng.standard_normal(len(upper_rows))
        values[upper_rows, upper_cols] = off
        values[upper_cols, upper_rows] = off
    values[np.arange(size), np.arange(size)] = diagonal

    return CouplingKernel(params, tuples, params.v0 * values)


def zero_couplings(params: EnsembleParams) -> CouplingKernel:
    """Kernel with every coefficient zero."""
    validate_params(params)
    tuples = k_tuples(params.l, params.k)
    return CouplingKernel(params, tuples, np.zeros((len(tuples), len(tuples))))


def dump_kernel(kernel: CouplingKernel) -> dict:
    """
    Deterministic JSON-ready form of a kernel.

    Tuple pairs are listed in sorted order with values as IEEE-754 doubles.
    """
    pairs = []
    for a, j in enumerate(kernel.tuples):
        for b, i in enumerate(kernel.tuples):
            v = kernel.values[a, b]
            pairs.append({"j": list(j), "i": list(i), "re": float(v.real), "im": float(v.imag)})
    return {"params": kernel.params.to_dict(), "couplings": pairs}


def load_kernel(document: dict) -> CouplingKernel:
    """Inverse of dump_kernel."""
    p = document["params"]
    params = EnsembleParams(
        beta=p["beta"], k=p["k"], m=p["m"], l=p["l"],
        statistics=Statistics(p["statistics"]), v0=p["v0"],
    )
    tuples = k_tuples(params.l, params.k)
    index = {t: a for a, t in enumerate(tuples)}
    values = np.zeros((len(tuples), len(tuples)), dtype=np.complex128)
    for entry in document["couplings"]:
        values[index[tuple(entry["j"])], index[tuple(entry["i"])]] = complex(entry["re"], entry["im"])
    return CouplingKernel(params, tuples, values)


# ===== HAMILTONIAN ASSEMBLY =====


@dataclass(frozen=True)
class HamiltonianStencil:
    """
    Sparse structure of sum_{j,i} v(j,i) a†_j a_i on a basis.

    Entry e adds amplitudes[e] * v[j_index[e], i_index[e]] to H[rows[e], cols[e]].
    """

    rows: np.ndarray
    cols: np.ndarray
    j_index: np.ndarray
    i_index: np.ndarray
    amplitudes: np.ndarray
    dimension: int


@lru_cache(maxsize=16)
def hamiltonian_stencil(l: int, m: int, k: int, statistics: Statistics) -> HamiltonianStencil:
    """Build (and cache) the stencil for one (l, m, k, statistics) point."""
    basis = fock_service.enumerate_basis(l, m, statistics)
    tuples = k_tuples(l, k)
    tuple_index = {t: a for a, t in enumerate(tuples)}
    rows, cols, js, is_, amps = [], [], [], [], []

    for col, nu in enumerate(basis):
        for i in fock_service.k_subsets(nu, k):
            lowered = fock_service.apply_annihilation_string(nu, i)
            if lowered is KILLED:
                continue
            for j in tuples:
                raised = fock_service.apply_creation_string(lowered.state, j)
                if raised is KILLED:
                    continue
                rows.append(basis.index(raised.state))
                cols.append(col)
                js.append(tuple_index[j])
                is_.append(tuple_index[i])
                amps.append(float(lowered.amplitude * raised.amplitude))

    logger.debug(f"Stencil l={l}, m={m}, k={k}: {len(rows)} entries over dimension {len(basis)}")
    return HamiltonianStencil(
        rows=np.asarray(rows, dtype=np.intp),
        cols=np.asarray(cols, dtype=np.intp),
        j_index=np.asarray(js, dtype=np.intp),
        i_index=np.asarray(is_, dtype=np.intp),
        amplitudes=np.asarray(amps, dtype=np.float64),
        dimension=len(basis),
    )


def build_hamiltonian(
    kernel: CouplingKernel, basis: Basis, max_dimension: Optional[int] = None
) -> HermitianMatrix:
    """
    H_{mu nu} = sum_{j,i} v(j,i) <mu| a†_j a_i |nu>.

    Args:
        kernel: Sampled couplings
        basis: Basis sharing (l, statistics) with the kernel
        max_dimension: Cap (defaults to ensemble.max_dimension)

    Returns:
        Dense HermitianMatrix in basis order

    Raises:
        InvalidEnsembleParamsError: If kernel and basis disagree
        DimensionCapExceededError: If the basis is larger than the cap
    """
    params = kernel.params
    if basis.levels != params.l or basis.statistics is not params.statistics:
        raise InvalidEnsembleParamsError("kernel and basis disagree on l or statistics")
    if params.k > basis.particles:
        raise InvalidEnsembleParamsError(f"k exceeds m ({params.k} > {basis.particles})")
    cap = max_dimension if max_dimension is not None else config.get_int("ensemble.max_dimension", 5000)
    if len(basis) > cap:
        raise DimensionCapExceededError(f"dimension {len(basis)} exceeds the cap of {cap}")

    stencil = hamiltonian_stencil(basis.levels, basis.particles, params.k, basis.statistics)
    data = np.zeros((stencil.dimension, stencil.dimension), dtype=np.complex128)
    contributions = stencil.amplitudes * kernel.values[stencil.j_index, stencil.i_index]
    np.add.at(data, (stencil.rows, stencil.cols), contributions)
    return HermitianMatrix(data)


def sample_hamiltonian(params: EnsembleParams, seed: int, sample_index: int = 0) -> HermitianMatrix:
    """Sample couplings and assemble them on the matching basis."""
    kernel = sample_couplings(params, seed, sample_index)
    basis = fock_service.enumerate_basis(params.l, params.m, params.statistics)
    return build_hamiltonian(kernel, basis)


def reference_state(l: int, m: int, statistics: Statistics) -> OccupationState:
    """The lexicographically first basis state, used where any state will do."""
    occupation = tuple(range(1, m + 1)) if statistics is Statistics.FERMIONIC else (1,) * m
    return OccupationState(occupation, l, statistics)
