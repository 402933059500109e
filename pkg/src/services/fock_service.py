"""
Fock-space service.

Basis enumeration and second-quantised operator strings on fermionic and bosonic
occupation states.

Ordering convention: a fermionic state {j_1 < ... < j_m} is a†_{j_1} ... a†_{j_m}|0>, so
removing or adding a particle at level x costs (-1)**(occupied levels strictly below x).
Strings act right to left: the annihilation string of (i_1, ..., i_k) is
a_{i_k} ... a_{i_1} (a_{i_1} acts first) and the creation string of (j_1, ..., j_k) is
a†_{j_1} ... a†_{j_k} (a†_{j_k} acts first).
"""

from itertools import combinations, combinations_with_replacement

import numpy as np

from src.models.fock import (
    KILLED,
    ONE,
    ZERO,
    Amplitude,
    Basis,
    IndexTuple,
    OccupationState,
    Statistics,
    StringOutcome,
    StringResult,
)
from src.services.combinatorics_service import binomial
from src.utils.config_loader import config
from src.utils.errors import EmbeddedEnsembleError
from src.utils.logger import logger


class InvalidBasisError(EmbeddedEnsembleError):
    """Raised for impossible (l, m, statistics) combinations."""


class BasisTooLargeError(EmbeddedEnsembleError):
    """Raised when a basis would exceed the configured size cap."""

    exit_status = 3


def basis_size(l: int, m: int, statistics: Statistics = Statistics.FERMIONIC) -> int:
    """C(l, m) for fermions, C(l + m - 1, m) for bosons."""
    if statistics is Statistics.BOSONIC:
        return bosonic_basis_size(l, m)
    return binomial(l, m)


def bosonic_basis_size(l: int, m: int) -> int:
    """Number of ways to put m bosons into l levels."""
    if m == 0:
        return 1
    return binomial(l + m - 1, m)


def bosonic_basis_size_by_occupied_levels(l: int, m: int) -> int:
    """
    Same count, summed over the number z of occupied levels: sum_z C(l, z) * C(m-1, z-1).

    Choose which z levels are occupied, then split m particles into z nonempty groups.
    """
    if m == 0:
        return 1
    return sum(binomial(l, z) * binomial(m - 1, z - 1) for z in range(1, m + 1))


def enumerate_basis(
    l: int,
    m: int,
    statistics: Statistics = Statistics.FERMIONIC,
    max_size: int | None = None,
) -> Basis:
    """
    Enumerate the m-particle basis over l levels in lexicographic order.

    Args:
        l: Number of single-particle levels
        m: Particle count
        statistics: Fermionic or bosonic
        max_size: Size cap (defaults to fock.max_basis_size)

    Returns:
        Basis with C(l, m) or C(l + m - 1, m) states

    Raises:
        InvalidBasisError: If m > l for fermions or arguments are negative
        BasisTooLargeError: If the basis would exceed the cap
    """
    if l < 1 or m < 0:
        raise InvalidBasisError(f"need l >= 1 and m >= 0, got l={l}, m={m}")
    if statistics is Statistics.FERMIONIC and m > l:
        raise InvalidBasisError(f"m exceeds l ({m} > {l}) for fermions")

    cap = max_size if max_size is not None else config.get_int("fock.max_basis_size", 50000)
    size = basis_size(l, m, statistics)
    if size > cap:
        raise BasisTooLargeError(f"basis of size {size} exceeds the cap of {cap}")

    generator = combinations if statistics is Statistics.FERMIONIC else combinations_with_replacement
    states = tuple(
        OccupationState(occ, l, statistics) for occ in generator(range(1, l + 1), m)
    )
    logger.debug(f"Enumerated {statistics.value} basis l={l}, m={m}: {len(states)} states")
    return Basis(l, m, statistics, states)


def _below(state: OccupationState, level: int) -> int:
    """Number of occupied fermionic levels strictly below level."""
    return (state.bitmask & ((1 << (level - 1)) - 1)).bit_count()


def annihilate(state: OccupationState, level: int, normalized: bool = True) -> StringOutcome:
    """
    a_level |state>.

    With normalized=False bosonic amplitudes are the integer n_level (the action on
    unnormalised monomial states), which keeps exact traces in the integers.
    """
    n = state.count(level)
    if n == 0:
        return KILLED
    occupation = list(state.occupation)
    occupation.remove(level)
    new_state = state.with_occupation(tuple(occupation))
    if state.statistics is Statistics.FERMIONIC:
        sign = -1 if _below(state, level) % 2 else 1
        return StringResult(Amplitude(sign), new_state)
    return StringResult(Amplitude.sqrt(n) if normalized else Amplitude(n), new_state)


def create(state: OccupationState, level: int, normalized: bool = True) -> StringOutcome:
    """a†_level |state>; kills on double occupancy for fermions."""
    if not 1 <= level <= state.levels:
        return KILLED
    n = state.count(level)
    if state.statistics is Statistics.FERMIONIC:
        if n:
            return KILLED
        sign = -1 if _below(state, level) % 2 else 1
        return StringResult(Amplitude(sign), state.with_occupation(state.occupation + (level,)))
    amplitude = Amplitude.sqrt(n + 1) if normalized else ONE
    return StringResult(amplitude, state.with_occupation(state.occupation + (level,)))


def apply_annihilation_string(
    state: OccupationState, t: IndexTuple, normalized: bool = True
) -> StringOutcome:
    """
    a_{t_k} ... a_{t_1} |state>.

    Returns:
        StringResult(amplitude, state') or KILLED
    """
    amplitude = ONE
    current = state
    for level in t:
        result = annihilate(current, level, normalized)
        if result is KILLED:
            return KILLED
        amplitude = amplitude * result.amplitude
        current = result.state
    return StringResult(amplitude, current)


def apply_creation_string(
    state: OccupationState, t: IndexTuple, normalized: bool = True
) -> StringOutcome:
    """
    a†_{t_1} ... a†_{t_k} |state>, the adjoint of apply_annihilation_string.

    Returns:
        StringResult(amplitude, state') or KILLED
    """
    amplitude = ONE
    current = state
    for level in reversed(t):
        result = create(current, level, normalized)
        if result is KILLED:
            return KILLED
        amplitude = amplitude * result.amplitude
        current = result.state
    return StringResult(amplitude, current)


def apply_monomial(
    state: OccupationState, j: IndexTuple, i: IndexTuple, normalized: bool = True
) -> StringOutcome:
    """a†_j a_i |state> as a single outcome."""
    lowered = apply_annihilation_string(state, i, normalized)
    if lowered is KILLED:
        return KILLED
    raised = apply_creation_string(lowered.state, j, normalized)
    if raised is KILLED:
        return KILLED
    return StringResult(lowered.amplitude * raised.amplitude, raised.state)


def monomial_element(
    mu: OccupationState, j: IndexTuple, i: IndexTuple, nu: OccupationState
) -> Amplitude:
    """
    <mu| a†_{j_1}..a†_{j_k} a_{i_k}..a_{i_1} |nu>.

    Zero unless mu and nu coincide outside the two tuples.
    """
    if len(j) != len(i):
        raise ValueError("creation and annihilation tuples must have equal length")
    result = apply_monomial(nu, j, i)
    if result is KILLED or result.state != mu:
        return ZERO
    return result.amplitude


def k_subsets(state: OccupationState, k: int) -> list[IndexTuple]:
    """All increasing k-tuples drawn from the occupied levels of a state."""
    return list(combinations(state.occupied_levels, k))


def operator_matrix(basis: Basis, j: IndexTuple, i: IndexTuple) -> np.ndarray:
    """Dense real matrix of a†_j a_i on a basis (columns are input states)."""
    matrix = np.zeros((len(basis), len(basis)))
    for col, state in enumerate(basis):
        result = apply_monomial(state, j, i)
        if result is not KILLED and result.state in basis:
            matrix[basis.index(result.state), col] = float(result.amplitude)
    return matrix
