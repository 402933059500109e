"""
Particle diagram engine.

Turns each Wick pairing of tr(H^n2) into a particle diagram, finds the loops along which
single-particle labels travel, and maximises the number of free labels (the power of l)
over nonnegative loop sizes that satisfy the bond conservation equations.

Conventions:
    Trace slot s carries the state x_s; H_{x_s x_{s+1}} is the solid bond c_s (x_s shares
    m - k levels with x_{s+1}). A pair (a, b), a < b, contributes the factor
    A_{mu nu rho sigma} with (mu, nu, rho, sigma) = (x_a, x_{b+1}, x_b, x_{a+1}) and two dashed
    bonds of size k: J (x_a -> x_{b+1}) and I (x_b -> x_{a+1}).

    A cyclically adjacent pair is a tail: averaging it gives
    C(m,k) * C(l-m+k,k) * delta(x_a, x_{a+2}) exactly, so tails are contracted before loop
    analysis and leave a tail-free core.

    Every bond carries its forward displacement around the ring; a loop's winding is its
    total displacement over the ring length. Summing sizes times displacements over all
    bonds gives sum_C n_C = m + n'k - sum_C n_C (w_C - 1) for a core with n' pairs, so the
    maximal argument m + n'k is reached exactly by solutions that only use winding-one loops.
"""

from dataclasses import replace
from fractions import Fraction
from functools import lru_cache
from math import factorial, prod
from typing import Optional

import sympy as sp

from src.models.diagram import (
    ArgumentCertificate,
    Bond,
    BondKind,
    ContractionPattern,
    LeadingTerm,
    Loop,
    LoopSystem,
    ParticleDiagram,
)
from src.models.pairing import PairingPartition
from src.services.combinatorics_service import binomial, multinomial
from src.services.wick_oracle_service import enumerate_pairings
from src.utils.config_loader import config
from src.utils.errors import BudgetExceededError, EmbeddedEnsembleError
from src.utils.logger import logger

SUPPORTED_ORDERS = (4, 6, 8)


class UnsupportedOrderError(EmbeddedEnsembleError):
    """Raised for trace orders outside 4, 6, 8."""


class InfeasibleSystemError(EmbeddedEnsembleError):
    """Raised when a loop system has no nonnegative solution within the cost budget."""


class SearchBudgetExceededError(BudgetExceededError):
    """Raised when the loop-size search visits more nodes than allowed."""


def _check_order(n2: int) -> None:
    if n2 not in SUPPORTED_ORDERS:
        raise UnsupportedOrderError(f"diagram analysis supports orders {SUPPORTED_ORDERS}, got {n2}")


# ===== PATTERNS AND TAILS =====


def _is_adjacent(a: int, b: int, slots: int) -> bool:
    return b == a + 1 or (a == 1 and b == slots)


def pairing_to_pattern(pairing: PairingPartition, n2: Optional[int] = None) -> ContractionPattern:
    """
    A-factorisation of a pairing.

    Example:
        pairing_to_pattern(PairingPartition(((1, 3), (2, 4)))).render()  # "A_{adcb}A_{badc}"
    """
    slots = pairing.slots
    if n2 is not None and n2 != slots:
        raise UnsupportedOrderError(f"pairing has {slots} slots, expected {n2}")

    def wrap(s: int) -> int:
        return (s - 1) % slots + 1

    factors = tuple((a, wrap(b + 1), b, wrap(a + 1)) for a, b in pairing.pairs)
    tails = tuple(p for p, (a, b) in enumerate(pairing.pairs) if _is_adjacent(a, b, slots))
    return ContractionPattern(order=slots, pairing=pairing, factors=factors, tail_factors=tails)


@lru_cache(maxsize=512)
def contract_tails(pairing: PairingPartition) -> tuple[PairingPartition, int]:
    """
    Repeatedly remove cyclically adjacent pairs, renumbering the remaining slots in order.

    Returns:
        (tail-free core pairing, number of tails removed); the core is empty for
        non-crossing pairings
    """
    pairs = list(pairing.pairs)
    slots = sorted(s for p in pairs for s in p)
    tails = 0
    while pairs:
        position = {s: index for index, s in enumerate(slots)}
        adjacent = next(
            (
                p for p in pairs
                if _is_adjacent(position[p[0]] + 1, position[p[1]] + 1, len(slots))
            ),
            None,
        )
        if adjacent is None:
            break
        pairs.remove(adjacent)
        slots = [s for s in slots if s not in adjacent]
        tails += 1
    renumber = {s: index + 1 for index, s in enumerate(slots)}
    core = PairingPartition(tuple((renumber[a], renumber[b]) for a, b in pairs))
    return core, tails


def dihedral_canonical(pairing: PairingPartition) -> PairingPartition:
    """Smallest image of a pairing under rotations and reversal of the trace."""
    slots = pairing.slots
    if slots == 0:
        return pairing
    images = []
    for reverse in (False, True):
        for shift in range(slots):

            def move(s: int) -> int:
                s = slots + 1 - s if reverse else s
                return (s - 1 + shift) % slots + 1

            images.append(PairingPartition(tuple((move(a), move(b)) for a, b in pairing.pairs)))
    return min(images)


# ===== DIAGRAMS AND LOOPS =====


def build_diagram(pattern: ContractionPattern) -> ParticleDiagram:
    """
    Particle diagram of a pattern with tail identifications applied.

    Solid bonds come first (c1..c2n, one per trace step), then J and I for every pair.
    """
    slots = pattern.order
    rep = pattern.identification()
    tail_pairs = set(pattern.tail_factors)
    bonds: list[Bond] = []

    def owner(slot: int) -> int:
        return next(p for p, pair in enumerate(pattern.pairing.pairs) if slot in pair)

    for s in range(1, slots + 1):
        target = s % slots + 1
        p = owner(s)
        bonds.append(Bond(len(bonds), f"c{s}", rep[s], rep[target], BondKind.SOLID, p, 1, p in tail_pairs))
    for p, (a, b) in enumerate(pattern.pairing.pairs):
        tail = p in tail_pairs
        j_target = b % slots + 1
        i_target = a % slots + 1
        bonds.append(
            Bond(len(bonds), f"J{p + 1}", rep[a], rep[j_target], BondKind.DASHED, p, (b + 1 - a) % slots, tail)
        )
        bonds.append(
            Bond(len(bonds), f"I{p + 1}", rep[b], rep[i_target], BondKind.DASHED, p, (a + 1 - b) % slots, tail)
        )
    nodes = tuple(sorted(set(rep.values())))
    return ParticleDiagram(
        nodes=nodes,
        bonds=tuple(bonds),
        factor_count=len(pattern.factors),
        ring_length=slots,
        tail_count=len(pattern.tail_factors),
    )


def core_diagram(pairing: PairingPartition) -> ParticleDiagram:
    """Diagram of the tail-free core; a bare single node when the core is empty."""
    core, tails = contract_tails(pairing)
    if not core.pairs:
        return ParticleDiagram(nodes=(1,), bonds=(), factor_count=0, ring_length=0, tail_count=tails)
    diagram = build_diagram(pairing_to_pattern(core))
    return ParticleDiagram(
        nodes=diagram.nodes,
        bonds=diagram.bonds,
        factor_count=diagram.factor_count,
        ring_length=diagram.ring_length,
        tail_count=tails,
    )


def enumerate_loops(diagram: ParticleDiagram) -> list[Loop]:
    """
    All simple directed cycles of bonds, each once.

    A cycle is rooted at its smallest bond id and only extended through larger ids, so each
    bond set is produced exactly once. A cycle never revisits a node: a label that returns
    to a state it has left repeats its path from there.
    """
    loops: list[Loop] = []
    outgoing = {node: diagram.out_bonds(node) for node in diagram.nodes}

    def winding(path: list[Bond]) -> int:
        total = sum(b.displacement for b in path)
        return total // diagram.ring_length if diagram.ring_length else 0

    for root in diagram.bonds:
        path = [root]
        visited = {root.source}

        def extend(node: int) -> None:
            if node == root.source:
                loops.append(
                    Loop(tuple(b.id for b in path), tuple(b.source for b in path), winding(path))
                )
                return
            if node in visited:
                return
            visited.add(node)
            for bond in outgoing[node]:
                if bond.id > root.id:
                    path.append(bond)
                    extend(bond.target)
                    path.pop()
            visited.discard(node)

        extend(root.target)

    loops.sort(key=lambda loop: (len(loop.bonds), loop.bonds))
    return loops


def loop_system(diagram: ParticleDiagram) -> LoopSystem:
    return LoopSystem(diagram, tuple(enumerate_loops(diagram)))


@lru_cache(maxsize=256)
def _core_system(pairing: PairingPartition) -> tuple[LoopSystem, int]:
    diagram = core_diagram(pairing)
    return loop_system(diagram), diagram.tail_count


# ===== ARGUMENT MAXIMISATION =====


class _NodeCounter:
    def __init__(self, budget: int):
        self.budget = budget
        self.count = 0

    def tick(self) -> None:
        self.count += 1
        if self.count > self.budget:
            raise SearchBudgetExceededError("loop-size search", self.budget)


class _LoopRoles:
    """Split of a core's loops into searched loops and loops forced by the equations."""

    def __init__(self, system: LoopSystem):
        diagram = system.diagram
        self.ring: Optional[int] = None
        self.singles: dict[int, int] = {}
        self.complex: list[int] = []
        self.costly: list[int] = []
        for index, loop in enumerate(system.loops):
            dashed = [b for b in loop.bonds if diagram.bond(b).kind is BondKind.DASHED]
            if loop.winding != 1:
                self.costly.append(index)
            elif not dashed:
                self.ring = index
            elif len(dashed) == 1:
                self.singles[dashed[0]] = index
            else:
                self.complex.append(index)
        dashed_ids = {b.id for b in diagram.bonds if b.kind is BondKind.DASHED}
        if self.ring is None or set(self.singles) != dashed_ids:
            raise InfeasibleSystemError("loop system is not a tail-free core")


def _solve(system: LoopSystem, m: int, k: int, cost: int, counter: _NodeCounter) -> list[tuple[int, ...]]:
    """
    Every nonnegative loop-size vector satisfying the bond equations with total cost exactly cost.

    Costly loops are searched first (their values bounded by the remaining cost), then the
    winding-one loops with two or more dashed bonds. Each single-dashed loop then takes whatever
    its dashed bond still needs, and the ring must take the same remainder on every solid bond.

    The ring remainder at solid s moves by -x * D(s) when a searched loop takes value x, with
    D(s) = [s in loop] - #(dashed bonds of the loop whose single passes s). Once every open loop
    has equal D on two solids their remainders can no longer change relative to each other, so
    they must already agree.
    """
    roles = _LoopRoles(system)
    loops = system.loops
    bonds = system.diagram.bonds
    residual = {b.id: b.size(m, k) for b in bonds}
    solid_ids = [b.id for b in bonds if b.kind is BondKind.SOLID]
    free = roles.costly + roles.complex
    values = [0] * len(loops)
    solutions: list[tuple[int, ...]] = []

    single_cover = {
        s: [e for e, index in roles.singles.items() if s in loops[index].bonds] for s in solid_ids
    }
    shift = {
        index: {
            s: int(s in loops[index].bonds)
            - sum(1 for e in loops[index].bonds if e in roles.singles and s in loops[roles.singles[e]].bonds)
            for s in solid_ids
        }
        for index in free
    }
    settled = []
    for position in range(len(free) + 1):
        open_loops = free[position:]
        settled.append([
            (s, t)
            for x, s in enumerate(solid_ids)
            for t in solid_ids[x + 1:]
            if all(shift[index][s] == shift[index][t] for index in open_loops)
        ])

    def ring_remainder(s: int) -> int:
        return residual[s] - sum(residual[e] for e in single_cover[s])

    def close() -> None:
        ring = ring_remainder(solid_ids[0])
        if ring < 0:
            return
        for dashed_id, index in roles.singles.items():
            values[index] = residual[dashed_id]
        values[roles.ring] = ring
        solutions.append(tuple(values))
        for index in roles.singles.values():
            values[index] = 0
        values[roles.ring] = 0

    def search(position: int, remaining: int) -> None:
        counter.tick()
        if position == len(roles.costly) and remaining:
            return
        if any(ring_remainder(s) != ring_remainder(t) for s, t in settled[position]):
            return
        if position == len(free):
            close()
            return
        index = free[position]
        loop = loops[index]
        cap = min(residual[b] for b in loop.bonds)
        if loop.cost:
            cap = min(cap, remaining // loop.cost)
        for value in range(cap + 1):
            values[index] = value
            for bond_id in loop.bonds:
                residual[bond_id] -= value
            search(position + 1, remaining - value * loop.cost)
            for bond_id in loop.bonds:
                residual[bond_id] += value
        values[index] = 0

    search(0, cost)
    return solutions


def _empty_core(m: int, k: int, tails: int) -> LeadingTerm:
    # a core without bonds is the bare m-particle state: one label set of size m
    return LeadingTerm(m=m, k=k, core_argument=m, tail_count=tails, cost=0, solutions=((m,),))


def maximize_argument(
    system: LoopSystem,
    m: int,
    k: int,
    tail_count: Optional[int] = None,
    max_cost: Optional[int] = None,
    node_budget: Optional[int] = None,
) -> LeadingTerm:
    """
    Maximal total loop size of a core system and every optimal solution.

    Searches total cost 0, 1, 2, ... and stops at the first cost with solutions.

    Args:
        system: Loop system of a tail-free core
        m: Particle count
        k: Interaction rank
        tail_count: Tails contracted off the core (defaults to the diagram's)
        max_cost: Largest cost tried (defaults to diagrams.max_cost_budget)
        node_budget: Search node cap (defaults to diagrams.search_node_budget)

    Returns:
        LeadingTerm with solutions in search order

    Raises:
        InfeasibleSystemError: If nothing is feasible up to max_cost
        SearchBudgetExceededError: If the search needs more nodes than node_budget
    """
    if not 0 <= k <= m:
        raise InfeasibleSystemError(f"need 0 <= k <= m, got m={m}, k={k}")
    tails = system.diagram.tail_count if tail_count is None else tail_count
    if not system.diagram.bonds:
        return _empty_core(m, k, tails)

    max_cost = max_cost if max_cost is not None else config.get_int("diagrams.max_cost_budget", 64)
    counter = _NodeCounter(node_budget or config.get_int("diagrams.search_node_budget", 2_000_000))
    pairs = system.diagram.factor_count
    roles = _LoopRoles(system)
    for cost in range(max_cost + 1):
        solutions = _solve(system, m, k, cost, counter)
        if not solutions:
            continue
        logger.debug(f"Optimal cost {cost} at m={m}, k={k}: {len(solutions)} solutions, {counter.count} nodes")
        free_parameters, fixed_values = [], []
        for index in range(len(system.loops)):
            column = [s[index] for s in solutions]
            low, high = min(column), max(column)
            if low == high:
                fixed_values.append((index, low))
            elif index in roles.costly or index in roles.complex:
                free_parameters.append((index, low, high))
        return LeadingTerm(
            m=m,
            k=k,
            core_argument=m + pairs * k - cost,
            tail_count=tails,
            cost=cost,
            solutions=tuple(solutions),
            free_parameters=tuple(free_parameters),
            fixed_values=tuple(fixed_values),
        )
    raise InfeasibleSystemError(f"no feasible loop sizes up to cost {max_cost} at m={m}, k={k}")


def tail_factor(l: int, m: int, k: int) -> int:
    """C(m,k) * C(l-m+k,k), the exact value of one contracted tail."""
    return binomial(m, k) * binomial(l - m + k, k)


def leading_term_value(term: LeadingTerm, l: int, m: Optional[int] = None, k: Optional[int] = None) -> int:
    """
    Tail factors times the sum over optimal solutions of multinomial(l; loop sizes).

    Example:
        # standard diagram at (l, m, k) = (10, 4, 1): multinomial(10; 2, 1, 1, 1, 1)
        leading_term_value(leading_term(PairingPartition(((1, 3), (2, 4))), 4, 1), 10)  # 75600
    """
    if (m is not None and m != term.m) or (k is not None and k != term.k):
        raise InfeasibleSystemError("leading term was computed at a different (m, k)")
    core = sum(multinomial(l, [size for size in solution if size]) for solution in term.solutions)
    return tail_factor(l, term.m, term.k) ** term.tail_count * core


def leading_term(pairing: PairingPartition, m: int, k: int, max_cost: Optional[int] = None) -> LeadingTerm:
    """
    Contract tails, build the core loop system and maximise it.

    The term also carries the class's certified symbolic argument and its validity region;
    outside that region the concrete argument falls below the symbolic one.
    """
    system, tails = _core_system(pairing)
    term = maximize_argument(system, m, k, tails, max_cost=max_cost)
    certificate = _certificate(pairing)
    if certificate is None:
        return term
    return replace(term, symbolic_argument=certificate.argument, validity=str(certificate.region))


def _feasible_at_full_argument(pairing: PairingPartition, m: int, k: int) -> list[tuple[int, ...]]:
    system, _ = _core_system(pairing)
    if not system.diagram.bonds:
        return [(m,)]
    counter = _NodeCounter(config.get_int("diagrams.search_node_budget", 2_000_000))
    return _solve(system, m, k, 0, counter)


def certify_argument(pairing: PairingPartition, max_m: Optional[int] = None) -> ArgumentCertificate:
    """
    Symbolic maximal argument m + n k of a class and the region where it is attained.

    The zero-cost system is solved at every 1 <= k <= m <= max_m; the region is m >= j k for
    the smallest j that matches feasibility at every point.

    Raises:
        InfeasibleSystemError: If no threshold j <= n explains the grid
    """
    max_m = max_m or config.get_int("diagrams.certification_max_m", 14)
    n = pairing.slots // 2
    points = [(m, k) for k in range(1, max_m + 1) for m in range(k, max_m + 1)]
    feasible = {(m, k): bool(_feasible_at_full_argument(pairing, m, k)) for m, k in points}
    m_symbol, k_symbol = sp.symbols("m k", integer=True, nonnegative=True)
    for threshold in range(n + 1):
        if all(feasible[(m, k)] == (m >= threshold * k) for m, k in points):
            region = sp.true if threshold == 0 else sp.Ge(m_symbol, threshold * k_symbol)
            return ArgumentCertificate(
                argument=m_symbol + n * k_symbol,
                region=region,
                threshold=threshold,
                points_checked=len(points),
            )
    raise InfeasibleSystemError(f"no threshold m >= j k explains the feasibility of {pairing}")


@lru_cache(maxsize=512)
def _certificate(pairing: PairingPartition) -> Optional[ArgumentCertificate]:
    try:
        return certify_argument(pairing)
    except InfeasibleSystemError as e:
        logger.debug(f"No certified argument for {pairing}: {e.message}")
        return None


# ===== CLASSES AND MOMENTS =====


@lru_cache(maxsize=8)
def _classes(n2: int) -> tuple[tuple[PairingPartition, int, int], ...]:
    merge_from = config.get_int("diagrams.merge_tail_orbits_from_order", 8)
    groups: dict[PairingPartition, list[PairingPartition]] = {}
    for pairing in enumerate_pairings(n2):
        canonical = dihedral_canonical(pairing)
        key = dihedral_canonical(contract_tails(pairing)[0]) if n2 >= merge_from else canonical
        groups.setdefault(key, []).append(canonical)
    classes = []
    for members in groups.values():
        representative = min(members)
        classes.append((representative, len(members), contract_tails(representative)[1]))
    classes.sort(key=lambda c: (-c[2], c[0]))
    return tuple(classes)


def canonical_classes(n2: int) -> list[tuple[ContractionPattern, int]]:
    """
    Pairings grouped into classes with equal limit contribution, with multiplicities.

    Classes are orbits under rotation and reversal of the trace. From order
    diagrams.merge_tail_orbits_from_order on, orbits whose tail-free cores are equivalent
    are merged. Classes are listed by tail count (descending), then representative.

    Raises:
        UnsupportedOrderError: For n2 outside 4, 6, 8
    """
    _check_order(n2)
    return [(pairing_to_pattern(rep), count) for rep, count, _ in _classes(n2)]


@lru_cache(maxsize=4096)
def class_limit(pairing: PairingPartition, m: int, k: int) -> Fraction:
    """
    lim_{l -> oo} of a pairing's trace over N * lambda0**n.

    Tails cancel one lambda0 each. A core with n' pairs contributes
    m! k!**n' / C(m,k)**n' * sum over zero-cost solutions of 1 / prod(n_C!), and nothing when
    the zero-cost system is infeasible. An empty core contributes 1.
    """
    if not 0 <= k <= m:
        raise InfeasibleSystemError(f"need 0 <= k <= m, got m={m}, k={k}")
    system, _ = _core_system(pairing)
    if not system.diagram.bonds:
        return Fraction(1)
    pairs = system.diagram.factor_count
    solutions = _feasible_at_full_argument(pairing, m, k)
    if not solutions:
        return Fraction(0)
    weight = sum(Fraction(1, prod(factorial(size) for size in solution)) for solution in solutions)
    return Fraction(factorial(m) * factorial(k) ** pairs, binomial(m, k) ** pairs) * weight


def assemble_moment(n: int, m: int, k: int) -> Fraction:
    """
    Limit 2n-th moment as the multiplicity-weighted sum of class limits.

    Example:
        assemble_moment(2, 4, 1)  # Fraction(11, 4)
    """
    _check_order(2 * n)
    total = Fraction(0)
    for pattern, multiplicity in canonical_classes(2 * n):
        total += multiplicity * class_limit(pattern.pairing, m, k)
    logger.debug(f"Assembled moment n={n}, m={m}, k={k}: {total}")
    return total


def diagram_report(n2: int, m: Optional[int] = None, k: Optional[int] = None, l: Optional[int] = None) -> dict:
    """
    Per-class report: pattern, core diagram, loops, equations and certified argument; with
    (m, k) also the optimal family and class limit, and with l the evaluated leading term.
    """
    classes = []
    for pattern, multiplicity in canonical_classes(n2):
        core, tails = contract_tails(pattern.pairing)
        system, _ = _core_system(pattern.pairing)
        certificate = _certificate(pattern.pairing)
        entry = {
            "pattern": pattern.to_dict(),
            "multiplicity": multiplicity,
            "tail_count": tails,
            "core": [list(p) for p in core.pairs],
            "diagram": system.diagram.to_dict(),
            "loop_system": system.to_dict(),
            "certificate": certificate.to_dict() if certificate else None,
        }
        if m is not None and k is not None:
            term = leading_term(pattern.pairing, m, k)
            entry["leading_term"] = term.to_dict()
            entry["class_limit"] = class_limit(pattern.pairing, m, k)
            if l is not None:
                entry["leading_term_value"] = leading_term_value(term, l)
        classes.append(entry)
        logger.info(f"Analysed class {pattern.render()} (x{multiplicity})")

    report = {"order": n2, "classes": classes}
    if m is not None and k is not None:
        report["m"], report["k"] = m, k
        report["moment"] = assemble_moment(n2 // 2, m, k)
    if l is not None:
        report["l"] = l
    return report


def render_report(report: dict) -> str:
    """Plain-text summary of a diagram_report."""
    lines = [f"Order {report['order']}: {len(report['classes'])} classes"]
    for entry in report["classes"]:
        pattern = entry["pattern"]
        certificate = entry["certificate"]
        argument = f"{certificate['argument']} on {certificate['region']}" if certificate else "uncertified"
        lines.append(
            f"  x{entry['multiplicity']:<3} {pattern['rendered']}  tails={entry['tail_count']}  "
            f"loops={len(entry['loop_system']['loops'])}  argument={argument}"
        )
        if "class_limit" in entry:
            lines.append(f"       limit {entry['class_limit']}")
    if "moment" in report:
        lines.append(f"Moment at m={report['m']}, k={report['k']}: {report['moment']}")
    return "\n".join(lines) + "\n"
