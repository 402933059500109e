"""
Ensemble parameter and coupling types.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from src.models.fock import IndexTuple, Statistics


@dataclass(frozen=True)
class PairMap:
    """
    Fixed-point-free involution sigma on levels 1..l.

    The canonical choice swaps 1<->2, 3<->4, ... (see canonical()).
    """

    images: tuple[int, ...]  # images[x - 1] = sigma(x)

    def __post_init__(self) -> None:
        images = tuple(self.images)
        object.__setattr__(self, "images", images)
        levels = len(images)
        for x, y in enumerate(images, start=1):
            if not 1 <= y <= levels:
                raise ValueError(f"sigma({x}) = {y} is outside 1..{levels}")
            if y == x:
                raise ValueError(f"sigma has a fixed point at {x}")
            if images[y - 1] != x:
                raise ValueError(f"sigma is not an involution at {x}")

    @classmethod
    def canonical(cls, levels: int) -> "PairMap":
        if levels % 2:
            raise ValueError("a pairwise permutation needs an even number of levels")
        return cls(tuple(x + 1 if x % 2 else x - 1 for x in range(1, levels + 1)))

    @property
    def levels(self) -> int:
        return len(self.images)

    def __call__(self, level: int) -> int:
        return self.images[level - 1]

    def apply(self, levels: IndexTuple) -> IndexTuple:
        """Image of a set of levels, returned sorted."""
        return tuple(sorted(self(x) for x in levels))


@dataclass(frozen=True)
class EnsembleParams:
    """The (beta, k, m, l) phase-space point of an embedded ensemble."""

    beta: int
    k: int
    m: int
    l: int
    statistics: Statistics = Statistics.FERMIONIC
    v0: float = 1.0
    pair_map: Optional[PairMap] = None

    def validation_errors(self) -> list[str]:
        """Human-readable reasons these parameters are invalid (empty when valid)."""
        errors = []
        if self.beta not in (1, 2, 4):
            errors.append(f"beta must be 1, 2 or 4, got {self.beta}")
        if self.k < 0:
            errors.append("k must be nonnegative")
        if self.k > self.m:
            errors.append(f"k exceeds m ({self.k} > {self.m})")
        if self.statistics is Statistics.FERMIONIC and self.m > self.l:
            errors.append(f"m exceeds l ({self.m} > {self.l})")
        if self.l < 1:
            errors.append("l must be at least 1")
        if self.beta == 4 and self.pair_map is None:
            errors.append("beta=4 requires a pair map")
        if self.pair_map is not None and self.pair_map.levels != self.l:
            errors.append("pair map is defined on a different number of levels")
        return errors

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "k": self.k,
            "m": self.m,
            "l": self.l,
            "statistics": self.statistics.value,
            "v0": self.v0,
        }


@dataclass(frozen=True)
class CouplingKernel:
    """
    Sampled coefficients v(j, i) for every ordered pair of k-tuples.

    values[a, b] holds v(tuples[a], tuples[b]); the array is read-only.
    """

    params: EnsembleParams
    tuples: tuple[IndexTuple, ...]
    values: np.ndarray
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.complex128, copy=True)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_index", {t: a for a, t in enumerate(self.tuples)})

    def tuple_index(self, t: IndexTuple) -> int:
        return self._index[tuple(t)]

    def value(self, j: IndexTuple, i: IndexTuple) -> complex:
        return complex(self.values[self.tuple_index(j), self.tuple_index(i)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CouplingKernel):
            return NotImplemented
        return (
            self.params == other.params
            and self.tuples == other.tuples
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Dense Hermitian matrix over a basis."""

    data: np.ndarray

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.complex128, copy=True)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dimension(self) -> int:
        return self.data.shape[0]

    def hermiticity_error(self) -> float:
        """max |H - H^dagger| relative to max |H| (0 for the zero matrix)."""
        scale = float(np.max(np.abs(self.data))) if self.data.size else 0.0
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.data - self.data.conj().T))) / scale

    def is_hermitian(self, tolerance: float = 1e-12) -> bool:
        return self.hermiticity_error() <= tolerance
