"""
Exact Wick oracle.

Ensemble-averaged traces tr(H^n2) computed with integer arithmetic only. The Gaussian
average of a product of 2n couplings is a sum over perfect matchings of the factors; for
each matching the trace is a sum of operator walks over the basis in which the second
operator of every pair is fixed by the second-moment kernel.

Also home to the k = m calculus: pairings to index cycles, cycles to Dyck words, and
non-crossing enumeration.

Strategies:
    full_basis: sum the diagonal walk over every basis state.
    reference_state: for fermionic beta=2 every matching's averaged operator commutes with
        the single-particle unitary group, which acts irreducibly on the m-particle space, so
        it is a multiple of the identity and tr = N * <x0|.|x0> for any single state x0.
    auto: reference_state where it applies, full_basis otherwise.

Bosonic walks use unnormalised monomial states (a|n) = n|n-1), a†|n) = |n+1)). That is a
diagonal similarity transform of the normalised basis, so traces are unchanged and every
amplitude stays an integer.
"""

from fractions import Fraction
from functools import lru_cache
from typing import Optional

from sqlalchemy.orm import Session

from src.models.fock import KILLED, IndexTuple, OccupationState, Statistics
from src.models.pairing import CycleDecomposition, DyckWord, PairingPartition
from src.repositories.trace_repo import TraceCacheRepository
from src.services import fock_service
from src.services.combinatorics_service import binomial, double_factorial_odd
from src.services.ensemble_service import k_tuples, reference_state
from src.utils.config_loader import config
from src.utils.errors import BudgetExceededError, EmbeddedEnsembleError
from src.utils.logger import logger

STRATEGIES = ("auto", "reference_state", "full_basis")


class InvalidPairingOrderError(EmbeddedEnsembleError):
    """Raised for odd trace orders or orders above the pairing guard."""


class OracleBudgetExceededError(BudgetExceededError):
    """Raised when a walk sum exceeds its operation budget."""


class CrossingPartitionError(EmbeddedEnsembleError):
    """Raised when a cycle decomposition is not a leading-order (non-crossing) one."""


# ===== PAIRINGS =====


def _check_order(n2: int) -> None:
    guard = config.get_int("oracle.max_pairing_slots", 12)
    if n2 < 2 or n2 % 2:
        raise InvalidPairingOrderError(f"trace order must be a positive even number, got {n2}")
    if n2 > guard:
        raise InvalidPairingOrderError(f"trace order {n2} is above the pairing guard of {guard}")


def _matchings(items: list[int]) -> list[list[tuple[int, int]]]:
    if not items:
        return [[]]
    first, rest = items[0], items[1:]
    result = []
    for position, other in enumerate(rest):
        remaining = rest[:position] + rest[position + 1:]
        for tail in _matchings(remaining):
            result.append([(first, other)] + tail)
    return result


@lru_cache(maxsize=16)
def enumerate_pairings(n2: int) -> tuple[PairingPartition, ...]:
    """
    All perfect matchings of slots 1..n2.

    Slot 1 is paired with each later slot in turn and the rest is matched recursively, so
    the order is deterministic.

    Raises:
        InvalidPairingOrderError: If n2 is odd, below 2, or above oracle.max_pairing_slots
    """
    _check_order(n2)
    return tuple(PairingPartition(tuple(p)) for p in _matchings(list(range(1, n2 + 1))))


def is_crossing(pairing: PairingPartition) -> bool:
    """True if two chords (a, b), (c, d) of the 2n-gon intersect: a < c < b < d."""
    for a, b in pairing.pairs:
        for c, d in pairing.pairs:
            if a < c < b < d:
                return True
    return False


def non_crossing_pairings(n2: int) -> list[PairingPartition]:
    return [p for p in enumerate_pairings(n2) if not is_crossing(p)]


# ===== CYCLES AND DYCK WORDS =====


def pairing_to_cycles(pairing: PairingPartition) -> CycleDecomposition:
    """
    Orbits of the index identifications t_a = t_{sigma(a)+1} induced by a pairing.

    Each orbit is listed along a -> sigma(a - 1) (slots modulo 2n), which gives
    (13)(2)(4) for {(1,2),(3,4)} and (1234) for {(1,3),(2,4)}.
    """
    slots = pairing.slots

    def step(a: int) -> int:
        previous = a - 1 if a > 1 else slots
        return pairing.partner(previous)

    seen: set[int] = set()
    cycles = []
    for start in range(1, slots + 1):
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        current = step(start)
        while current != start:
            cycle.append(current)
            seen.add(current)
            current = step(current)
        cycles.append(tuple(cycle))
    return CycleDecomposition(tuple(cycles))


def _orbits_cross(cycles: CycleDecomposition) -> bool:
    """Chord intersection between the polygons spanned by two different orbits."""
    owner = {slot: index for index, cycle in enumerate(cycles.cycles) for slot in cycle}
    order = sorted(owner)
    for x, a in enumerate(order):
        for y in range(x + 1, len(order)):
            b = order[y]
            if owner[a] == owner[b]:
                continue
            for z in range(y + 1, len(order)):
                c = order[z]
                if owner[c] != owner[a]:
                    continue
                for d in order[z + 1:]:
                    if owner[d] == owner[b]:
                        return True
    return False


def cycle_to_dyck(cycles: CycleDecomposition) -> DyckWord:
    """
    Translate a leading-order cycle into a Dyck word of length 2n + 2.

    Write 1..2n in order, open a bracket before every slot that starts an orbit and close one
    after every slot that ends an orbit (orbits read in increasing order), drop the numbers and
    write X for "(" and Y for ")".

    Raises:
        CrossingPartitionError: If two orbits cross on the 2n-gon or the decomposition does
            not have the n + 1 orbits of a non-crossing pairing
    """
    slots = cycles.slots
    if _orbits_cross(cycles):
        raise CrossingPartitionError(f"{cycles} has crossing orbits")
    if cycles.orbit_count != slots // 2 + 1:
        raise CrossingPartitionError(
            f"{cycles} has {cycles.orbit_count} orbits; a non-crossing pairing of {slots} "
            f"slots has {slots // 2 + 1}"
        )
    starts = {min(c) for c in cycles.cycles}
    ends = {max(c) for c in cycles.cycles}
    letters = []
    for slot in range(1, slots + 1):
        if slot in starts:
            letters.append("X")
        if slot in ends:
            letters.append("Y")
    return DyckWord("".join(letters))


def dyck_words(n: int) -> list[DyckWord]:
    """All catalan(n) Dyck words of length 2n in lexicographic order (X < Y)."""
    if n < 0 or n > 14:
        raise InvalidPairingOrderError(f"dyck_words supports 0 <= n <= 14, got {n}")
    words: list[DyckWord] = []

    def grow(prefix: str, opened: int, closed: int) -> None:
        if closed == n:
            words.append(DyckWord(prefix))
            return
        if opened < n:
            grow(prefix + "X", opened + 1, closed)
        if closed < opened:
            grow(prefix + "Y", opened, closed + 1)

    grow("", 0, 0)
    return words


def km_trace_polynomial(n2: int) -> dict[int, int]:
    """
    tr(H^n2) at k = m as a polynomial in N: {orbit count: number of pairings}.

    Example:
        km_trace_polynomial(4)  # {3: 2, 1: 1}, i.e. 2N^3 + N
    """
    polynomial: dict[int, int] = {}
    for pairing in enumerate_pairings(n2):
        orbits = pairing_to_cycles(pairing).orbit_count
        polynomial[orbits] = polynomial.get(orbits, 0) + 1
    return dict(sorted(polynomial.items(), reverse=True))


def evaluate_trace_polynomial(polynomial: dict[int, int], n: int) -> int:
    return sum(multiplicity * n**power for power, multiplicity in polynomial.items())


# ===== WALK SUMS =====


class _OperationCounter:
    """Deterministic work meter."""

    def __init__(self, budget: int):
        self.budget = budget
        self.count = 0

    def tick(self) -> None:
        self.count += 1
        if self.count > self.budget:
            raise OracleBudgetExceededError("exact trace walk", self.budget)


@lru_cache(maxsize=100_000)
def _moves(state: OccupationState, k: int) -> tuple[tuple[IndexTuple, IndexTuple, int, OccupationState], ...]:
    """Every (j, i, amplitude, a†_j a_i |state>) with a nonzero result."""
    moves = []
    for i in fock_service.k_subsets(state, k):
        lowered = fock_service.apply_annihilation_string(state, i, normalized=False)
        if lowered is KILLED:
            continue
        for j in k_tuples(state.levels, k):
            raised = fock_service.apply_creation_string(lowered.state, j, normalized=False)
            if raised is KILLED:
                continue
            moves.append((j, i, int(lowered.amplitude * raised.amplitude), raised.state))
    return tuple(moves)


@lru_cache(maxsize=200_000)
def _move(state: OccupationState, j: IndexTuple, i: IndexTuple) -> Optional[tuple[int, OccupationState]]:
    result = fock_service.apply_monomial(state, j, i, normalized=False)
    if result is KILLED:
        return None
    return int(result.amplitude), result.state


def _diagonal_walk(
    start: OccupationState,
    pairing: PairingPartition,
    k: int,
    beta: int,
    counter: _OperationCounter,
) -> int:
    """
    <start| O_1 ... O_2n |start> summed over kernel-compatible operator choices.

    Slots are visited right to left. The larger slot of a pair is met first and branches over
    every operator acting nontrivially; the smaller slot is then fixed by the kernel deltas.
    """
    partner = {}
    for a, b in pairing.pairs:
        partner[a], partner[b] = b, a
    assigned: dict[int, tuple[IndexTuple, IndexTuple]] = {}

    def step(slot: int, state: OccupationState) -> int:
        if slot == 0:
            return 1 if state == start else 0
        mate = partner[slot]
        total = 0
        if mate < slot:
            for j, i, amplitude, following in _moves(state, k):
                counter.tick()
                assigned[slot] = (j, i)
                total += amplitude * step(slot - 1, following)
            assigned.pop(slot, None)
            return total

        j_first, i_first = assigned[mate]
        choices = [(i_first, j_first)]
        if beta == 1:
            choices.append((j_first, i_first))
        for j, i in choices:
            counter.tick()
            outcome = _move(state, j, i)
            if outcome is None:
                continue
            amplitude, following = outcome
            total += amplitude * step(slot - 1, following)
        return total

    return step(pairing.slots, start)


def resolve_strategy(strategy: Optional[str], beta: int, statistics: Statistics) -> str:
    """Concrete strategy for a request; auto picks reference_state only where it is exact."""
    strategy = strategy or str(config.get("oracle.strategy", "auto"))
    if strategy not in STRATEGIES:
        raise EmbeddedEnsembleError(f"unknown oracle strategy {strategy!r}")
    invariant = beta == 2 and statistics is Statistics.FERMIONIC
    if strategy == "auto":
        return "reference_state" if invariant else "full_basis"
    if strategy == "reference_state" and not invariant:
        raise EmbeddedEnsembleError(
            "the reference_state strategy is only exact for fermionic beta=2"
        )
    return strategy


def _check_point(l: int, m: int, k: int, beta: int, statistics: Statistics) -> None:
    if beta not in (1, 2):
        raise EmbeddedEnsembleError(f"the oracle supports beta 1 and 2, got {beta}")
    if k < 0 or k > m:
        raise EmbeddedEnsembleError(f"k exceeds m ({k} > {m})")
    if statistics is Statistics.FERMIONIC and m > l:
        raise EmbeddedEnsembleError(f"m exceeds l ({m} > {l})")


def pairing_trace(
    l: int,
    m: int,
    k: int,
    pairing: PairingPartition,
    beta: int = 2,
    statistics: Statistics = Statistics.FERMIONIC,
    strategy: Optional[str] = None,
    budget: Optional[int] = None,
    counter: Optional[_OperationCounter] = None,
) -> int:
    """
    Contribution of one matching to tr(H^n2) at v0 = 1.

    Raises:
        OracleBudgetExceededError: If the walk needs more operator applications than budget
    """
    _check_point(l, m, k, beta, statistics)
    if counter is None:
        counter = _OperationCounter(budget or config.get_int("oracle.operation_budget", 200_000_000))
    resolved = resolve_strategy(strategy, beta, statistics)
    if resolved == "reference_state":
        dimension = fock_service.basis_size(l, m, statistics)
        return dimension * _diagonal_walk(reference_state(l, m, statistics), pairing, k, beta, counter)
    basis = fock_service.enumerate_basis(l, m, statistics)
    return sum(_diagonal_walk(state, pairing, k, beta, counter) for state in basis)


def exact_even_trace(
    l: int,
    m: int,
    k: int,
    n2: int,
    beta: int = 2,
    statistics: Statistics = Statistics.FERMIONIC,
    strategy: Optional[str] = None,
    budget: Optional[int] = None,
) -> int:
    """
    Exact tr(H^n2) averaged over the ensemble at v0 = 1.

    Args:
        l: Number of levels
        m: Particle count
        k: Interaction rank
        n2: Even trace order
        beta: 1 or 2
        statistics: Fermionic or bosonic
        strategy: auto, reference_state or full_basis (defaults to oracle.strategy)
        budget: Operator-application cap (defaults to oracle.operation_budget)

    Returns:
        The exact integer trace

    Raises:
        InvalidPairingOrderError: For odd or oversized n2
        OracleBudgetExceededError: If the walk sums exceed the budget

    Example:
        exact_even_trace(4, 2, 1, 2)  # 36 = C(4,2) * C(2,1) * C(3,1)
    """
    pairings = enumerate_pairings(n2)
    counter = _OperationCounter(budget or config.get_int("oracle.operation_budget", 200_000_000))
    total = 0
    for pairing in pairings:
        partial = pairing_trace(l, m, k, pairing, beta, statistics, strategy, counter=counter)
        logger.debug(f"Pairing {pairing}: {partial}")
        total += partial
    logger.info(
        f"Exact trace l={l}, m={m}, k={k}, n2={n2}, beta={beta}, {statistics.value}: "
        f"{total} ({counter.count} operations)"
    )
    return total


def cached_exact_even_trace(
    db: Session,
    l: int,
    m: int,
    k: int,
    n2: int,
    beta: int = 2,
    statistics: Statistics = Statistics.FERMIONIC,
    budget: Optional[int] = None,
) -> int:
    """
    exact_even_trace backed by the trace cache.

    A failed cache write is logged and the computed value is returned unchanged.
    """
    repo = TraceCacheRepository(db)
    cached = repo.get_trace(statistics.value, beta, l, m, k, n2)
    if cached is not None:
        logger.debug(f"Trace cache hit l={l}, m={m}, k={k}, n2={n2}")
        return cached

    value = exact_even_trace(l, m, k, n2, beta, statistics, budget=budget)
    try:
        repo.store_trace(statistics.value, beta, l, m, k, n2, value, double_factorial_odd(n2 // 2))
    except Exception as e:
        db.rollback()
        logger.warning(f"Could not cache trace l={l}, m={m}, k={k}, n2={n2}: {e}")
    return value


def second_trace_closed_form(l: int, m: int, k: int) -> int:
    """C(l,m) * C(m,k) * C(l-m+k,k): choose the k removed, the k added, and the m-k kept."""
    return binomial(l, m) * binomial(m, k) * binomial(l - m + k, k)


def exact_moment(
    l: int,
    m: int,
    k: int,
    n2: int,
    beta: int = 2,
    statistics: Statistics = Statistics.FERMIONIC,
    budget: Optional[int] = None,
) -> Fraction:
    """
    Normalised finite-l moment tr(H^n2) * N^(n-1) / tr(H^2)^n with n = n2 / 2.

    Example:
        exact_moment(8, 4, 1, 4)  # approaches 11/4 as l grows
    """
    n = n2 // 2
    dimension = fock_service.basis_size(l, m, statistics)
    numerator = exact_even_trace(l, m, k, n2, beta, statistics, budget=budget)
    denominator = exact_even_trace(l, m, k, 2, beta, statistics, budget=budget)
    return Fraction(numerator * dimension ** (n - 1), denominator**n)


def standard_diagram_sum(
    l: int,
    m: int,
    k: int,
    statistics: Statistics = Statistics.FERMIONIC,
    budget: Optional[int] = None,
) -> int:
    """
    The crossing-pairing part of tr(H^4) at beta=2.

    For fermions this equals exact_even_trace(l, m, k, 4) - 2 * C(l,m) * (C(m,k) * C(l-m+k,k))**2, because each
    of the two non-crossing pairings is a product of two second moments.
    """
    crossing = PairingPartition(((1, 3), (2, 4)))
    return pairing_trace(l, m, k, crossing, 2, statistics, budget=budget)
