"""
Symbolic products of binomials in the level count l.
"""

from dataclasses import dataclass
from math import comb


@dataclass(frozen=True)
class BinomialFactor:
    """C(l - offset, lower) ** exponent."""

    offset: int
    lower: int
    exponent: int = 1

    def __post_init__(self) -> None:
        if self.lower < 0:
            raise ValueError("lower index must be nonnegative")
        if self.exponent < 1:
            raise ValueError("exponent must be positive")


@dataclass(frozen=True)
class BinomialProduct:
    """Product of binomial factors, evaluated at a concrete l on demand."""

    factors: tuple[BinomialFactor, ...] = ()

    @classmethod
    def of(cls, *terms: tuple[int, int] | tuple[int, int, int]) -> "BinomialProduct":
        """Build from (offset, lower[, exponent]) tuples."""
        return cls(tuple(BinomialFactor(*t) for t in terms))

    def evaluate(self, l: int) -> int:
        value = 1
        for f in self.factors:
            if l - f.offset < f.lower:
                raise ValueError(f"l={l} too small for C(l-{f.offset}, {f.lower})")
            value *= comb(l - f.offset, f.lower) ** f.exponent
        return value

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        parts = []
        for f in self.factors:
            top = "l" if f.offset == 0 else f"l-{f.offset}"
            power = "" if f.exponent == 1 else f"^{f.exponent}"
            parts.append(f"C({top},{f.lower}){power}")
        return "*".join(parts)
