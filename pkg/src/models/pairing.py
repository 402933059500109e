"""
Wick pairing types: perfect matchings of trace slots, their index cycles and Dyck words.
"""

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class PairingPartition:
    """
    Perfect matching on slots 1..2n.

    Pairs are stored as (a, b) with a < b, sorted by a.
    """

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        pairs = tuple(sorted(tuple(sorted(p)) for p in self.pairs))
        object.__setattr__(self, "pairs", pairs)
        slots = [s for p in pairs for s in p]
        if sorted(slots) != list(range(1, len(slots) + 1)):
            raise ValueError(f"{pairs} is not a perfect matching of 1..{len(slots)}")
        if any(a == b for a, b in pairs):
            raise ValueError("a slot cannot be paired with itself")

    @property
    def slots(self) -> int:
        return 2 * len(self.pairs)

    def partner(self, slot: int) -> int:
        for a, b in self.pairs:
            if a == slot:
                return b
            if b == slot:
                return a
        raise KeyError(slot)

    def __str__(self) -> str:
        return "".join(f"({a},{b})" if self.slots > 9 else f"({a}{b})" for a, b in self.pairs)


@dataclass(frozen=True)
class CycleDecomposition:
    """
    Partition of slots 1..2n into orbits.

    Each orbit starts at its smallest slot; orbits are ordered by that slot.
    """

    cycles: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        canonical = []
        for cycle in self.cycles:
            cycle = tuple(cycle)
            start = cycle.index(min(cycle))
            canonical.append(cycle[start:] + cycle[:start])
        canonical.sort(key=lambda c: c[0])
        object.__setattr__(self, "cycles", tuple(canonical))

    @property
    def orbit_count(self) -> int:
        return len(self.cycles)

    @property
    def slots(self) -> int:
        return sum(len(c) for c in self.cycles)

    def cycle_type(self) -> dict[int, int]:
        """c_i = number of orbits of length i."""
        counts: dict[int, int] = {}
        for cycle in self.cycles:
            counts[len(cycle)] = counts.get(len(cycle), 0) + 1
        return counts

    def orbit_of(self, slot: int) -> tuple[int, ...]:
        for cycle in self.cycles:
            if slot in cycle:
                return cycle
        raise KeyError(slot)

    def __str__(self) -> str:
        return "".join("(" + "".join(str(s) for s in c) + ")" for c in self.cycles)


@dataclass(frozen=True, order=True)
class DyckWord:
    """Balanced word over {X, Y} in which no prefix has more Y than X."""

    letters: str

    def __post_init__(self) -> None:
        height = 0
        for letter in self.letters:
            if letter not in "XY":
                raise ValueError(f"unexpected letter {letter!r}")
            height += 1 if letter == "X" else -1
            if height < 0:
                raise ValueError(f"{self.letters} dips below zero")
        if height != 0:
            raise ValueError(f"{self.letters} is unbalanced")

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.letters
