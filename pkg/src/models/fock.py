"""
Many-body state types.

Occupation states, ordered bases, exact operator amplitudes and the absorbing kill value
returned when an operator string annihilates a state.
"""

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

from sympy.ntheory.factor_ import core as squarefree_core

IndexTuple = tuple[int, ...]


class Statistics(str, enum.Enum):
    """Particle statistics of a basis."""

    FERMIONIC = "fermionic"
    BOSONIC = "bosonic"


@dataclass(frozen=True, order=True)
class OccupationState:
    """
    One m-particle basis state over levels 1..l.

    Fermionic states list distinct occupied levels; bosonic states list each level once per
    particle in it, so (1, 1, 2) is two bosons in level 1 and one in level 2. Ordering is
    lexicographic on the occupation tuple.
    """

    occupation: IndexTuple
    levels: int
    statistics: Statistics = Statistics.FERMIONIC

    def __post_init__(self) -> None:
        occ = tuple(self.occupation)
        object.__setattr__(self, "occupation", occ)
        if list(occ) != sorted(occ):
            raise ValueError(f"Occupation {occ} is not sorted")
        if occ and (occ[0] < 1 or occ[-1] > self.levels):
            raise ValueError(f"Occupation {occ} outside levels 1..{self.levels}")
        if self.statistics is Statistics.FERMIONIC and len(set(occ)) != len(occ):
            raise ValueError(f"Fermionic occupation {occ} repeats a level")

    @property
    def particle_count(self) -> int:
        return len(self.occupation)

    @property
    def occupied_levels(self) -> IndexTuple:
        return tuple(sorted(set(self.occupation)))

    @property
    def bitmask(self) -> int:
        """Bit (level - 1) set for every occupied level."""
        mask = 0
        for level in self.occupation:
            mask |= 1 << (level - 1)
        return mask

    def count(self, level: int) -> int:
        """Occupation number n_level."""
        return self.occupation.count(level)

    def multiplicities(self) -> dict[int, int]:
        return dict(Counter(self.occupation))

    def with_occupation(self, occupation: IndexTuple) -> "OccupationState":
        return OccupationState(tuple(sorted(occupation)), self.levels, self.statistics)

    def label(self) -> str:
        return "{" + ",".join(str(x) for x in self.occupation) + "}"

    def to_dict(self) -> dict:
        return {
            "occupation": list(self.occupation),
            "levels": self.levels,
            "statistics": self.statistics.value,
            "label": self.label(),
        }

    def __str__(self) -> str:
        return f"|{self.label()}>"


def vacuum(levels: int, statistics: Statistics = Statistics.FERMIONIC) -> OccupationState:
    """The zero-particle state."""
    return OccupationState((), levels, statistics)


@dataclass(frozen=True)
class Basis:
    """Lexicographically ordered, duplicate-free m-particle basis."""

    levels: int
    particles: int
    statistics: Statistics
    states: tuple[OccupationState, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[OccupationState]:
        return iter(self.states)

    def __getitem__(self, position: int) -> OccupationState:
        return self.states[position]

    def index(self, state: OccupationState) -> int:
        """Position of a state; KeyError if it is not in the basis."""
        return self._index[state]

    def __contains__(self, state: object) -> bool:
        return state in self._index


@dataclass(frozen=True)
class Amplitude:
    """
    Exact real amplitude coefficient * sqrt(radicand), radicand squarefree.

    Fermionic amplitudes are always +-1; bosonic amplitudes carry sqrt(n) factors.
    """

    coefficient: int
    radicand: int = 1

    def __post_init__(self) -> None:
        if self.radicand < 1:
            raise ValueError("radicand must be positive")
        if self.radicand > 1:
            core = int(squarefree_core(self.radicand, 2))
            if core != self.radicand:
                root = math.isqrt(self.radicand // core)
                object.__setattr__(self, "coefficient", self.coefficient * root)
                object.__setattr__(self, "radicand", core)
        if self.coefficient == 0:
            object.__setattr__(self, "radicand", 1)

    @classmethod
    def sqrt(cls, n: int) -> "Amplitude":
        return cls(1, n) if n > 0 else cls(0)

    def __mul__(self, other: "Amplitude") -> "Amplitude":
        return Amplitude(self.coefficient * other.coefficient, self.radicand * other.radicand)

    def __neg__(self) -> "Amplitude":
        return Amplitude(-self.coefficient, self.radicand)

    @property
    def is_zero(self) -> bool:
        return self.coefficient == 0

    @property
    def is_integer(self) -> bool:
        return self.radicand == 1

    def squared(self) -> int:
        return self.coefficient * self.coefficient * self.radicand

    def __float__(self) -> float:
        return self.coefficient * math.sqrt(self.radicand)

    def __int__(self) -> int:
        if self.radicand != 1:
            raise ValueError(f"{self} is irrational")
        return self.coefficient

    def __str__(self) -> str:
        if self.radicand == 1:
            return str(self.coefficient)
        return f"{self.coefficient}*sqrt({self.radicand})"


ONE = Amplitude(1)
ZERO = Amplitude(0)


class Kill(enum.Enum):
    """Absorbing result of an operator string that annihilates its input."""

    KILLED = "killed"

    def __bool__(self) -> bool:
        return False


KILLED = Kill.KILLED


class StringResult(NamedTuple):
    amplitude: Amplitude
    state: OccupationState


StringOutcome = StringResult | Kill
