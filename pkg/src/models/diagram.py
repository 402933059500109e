"""
Particle diagram types.

Nodes are m-body states (labelled by trace slot), bonds join states that share k
(dashed) or m-k (solid) single-particle levels, and loops are the directed cycles along
which individual levels travel through the diagram.
"""

import enum
import string
from dataclasses import dataclass, field
from typing import Optional

import sympy as sp

from src.models.pairing import PairingPartition

FactorLabels = tuple[int, int, int, int]


class BondKind(str, enum.Enum):
    SOLID = "solid"  # shares m - k levels
    DASHED = "dashed"  # shares k levels


@dataclass(frozen=True)
class ContractionPattern:
    """
    A-factorisation of one Wick pairing of tr(H^n2).

    factors[p] = (mu, nu, rho, sigma) for pair p, with node labels given by trace slot.
    tail_factors lists factors whose pair is cyclically adjacent; such a factor forces
    mu = nu and rho = sigma (one of the two holds trivially).
    """

    order: int
    pairing: PairingPartition
    factors: tuple[FactorLabels, ...]
    tail_factors: tuple[int, ...]

    def identification(self) -> dict[int, int]:
        """Map every slot to the smallest slot it is identified with by tail deltas."""
        parent = {s: s for s in range(1, self.order + 1)}

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for p in self.tail_factors:
            mu, nu, rho, sigma = self.factors[p]
            for x, y in ((mu, nu), (rho, sigma)):
                a, b = find(x), find(y)
                if a != b:
                    parent[max(a, b)] = min(a, b)
        return {s: find(s) for s in parent}

    def identified(self) -> tuple[FactorLabels, ...]:
        """Factors with tail identifications applied."""
        rep = self.identification()
        return tuple(tuple(rep[x] for x in f) for f in self.factors)

    def render(self, identified: bool = True) -> str:
        """Letters for node labels, e.g. A_{abcd}A_{dabc}."""
        factors = self.identified() if identified else self.factors
        letters = string.ascii_lowercase
        return "".join(
            "A_{" + "".join(letters[x - 1] for x in f) + "}" for f in factors
        )

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "pairing": [list(p) for p in self.pairing.pairs],
            "factors": [list(f) for f in self.factors],
            "tail_factors": list(self.tail_factors),
            "rendered": self.render(),
        }


@dataclass(frozen=True)
class Bond:
    """
    Directed bond between two states.

    displacement is the forward distance from source to target around the trace ring; it
    decides the winding of every loop through the bond.
    """

    id: int
    name: str
    source: int
    target: int
    kind: BondKind
    factor: int
    displacement: int = 0
    tail: bool = False

    def size(self, m: int, k: int) -> int:
        return k if self.kind is BondKind.DASHED else m - k

    @property
    def size_class(self) -> str:
        return "k" if self.kind is BondKind.DASHED else "m-k"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "source": self.source,
            "target": self.target,
            "kind": self.kind.value,
            "size_class": self.size_class,
            "factor": self.factor,
            "displacement": self.displacement,
            "tail": self.tail,
        }


@dataclass(frozen=True)
class ParticleDiagram:
    nodes: tuple[int, ...]
    bonds: tuple[Bond, ...]
    factor_count: int
    ring_length: int
    tail_count: int = 0

    def bond(self, bond_id: int) -> Bond:
        return self.bonds[bond_id]

    def out_bonds(self, node: int) -> tuple[Bond, ...]:
        return tuple(b for b in self.bonds if b.source == node)

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "bonds": [b.to_dict() for b in self.bonds],
            "factor_count": self.factor_count,
            "tail_count": self.tail_count,
        }


@dataclass(frozen=True)
class Loop:
    """Directed cycle of bonds, stored starting from its smallest bond id."""

    bonds: tuple[int, ...]
    nodes: tuple[int, ...]
    winding: int

    @property
    def cost(self) -> int:
        """Argument lost per unit of loop size."""
        return self.winding - 1

    def to_dict(self) -> dict:
        return {"bonds": list(self.bonds), "nodes": list(self.nodes), "winding": self.winding}


@dataclass(frozen=True)
class LoopSystem:
    """
    Loops of a diagram and the per-bond conservation equations
    sum(n_loop for loops through bond) = size(bond).
    """

    diagram: ParticleDiagram
    loops: tuple[Loop, ...]
    incidence: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        incidence: dict[int, list[int]] = {b.id: [] for b in self.diagram.bonds}
        for index, loop in enumerate(self.loops):
            for bond_id in loop.bonds:
                incidence[bond_id].append(index)
        object.__setattr__(self, "incidence", {b: tuple(v) for b, v in incidence.items()})

    def uncovered_bonds(self) -> tuple[int, ...]:
        return tuple(b for b, loops in self.incidence.items() if not loops)

    def to_dict(self) -> dict:
        return {
            "loops": [loop.to_dict() for loop in self.loops],
            "equations": [
                {"bond": b.name, "loops": list(self.incidence[b.id]), "rhs": b.size_class}
                for b in self.diagram.bonds
            ],
        }


@dataclass(frozen=True)
class LeadingTerm:
    """
    Maximal-argument configurations of a loop system at concrete (m, k).

    solutions holds one loop-size vector per optimal integer solution, in search order.
    argument counts the tails, each of which contributes k.
    """

    m: int
    k: int
    core_argument: int
    tail_count: int
    cost: int
    solutions: tuple[tuple[int, ...], ...]
    free_parameters: tuple[tuple[int, int, int], ...] = ()
    fixed_values: tuple[tuple[int, int], ...] = ()
    symbolic_argument: Optional[sp.Expr] = None
    validity: Optional[str] = None

    @property
    def argument(self) -> int:
        return self.core_argument + self.tail_count * self.k

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "k": self.k,
            "argument": self.argument,
            "core_argument": self.core_argument,
            "tail_count": self.tail_count,
            "cost": self.cost,
            "solution_count": len(self.solutions),
            "solutions": [list(s) for s in self.solutions],
            "free_parameters": [
                {"loop": loop, "min": lo, "max": hi} for loop, lo, hi in self.free_parameters
            ],
            "fixed_values": {str(loop): value for loop, value in self.fixed_values},
            "symbolic_argument": None if self.symbolic_argument is None else str(self.symbolic_argument),
            "validity": self.validity,
        }


@dataclass(frozen=True)
class ArgumentCertificate:
    """
    Symbolic maximal argument of a class, checked point by point on a grid of (m, k).

    threshold j means the maximal argument is attained exactly when m >= j*k.
    """

    argument: sp.Expr
    region: sp.Basic
    threshold: int
    points_checked: int

    def to_dict(self) -> dict:
        return {
            "argument": str(self.argument),
            "region": str(self.region),
            "threshold": self.threshold,
            "points_checked": self.points_checked,
        }
