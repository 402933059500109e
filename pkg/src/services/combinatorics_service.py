"""
Exact combinatorics.

Binomials, multinomials, double factorials, Catalan numbers, binomial-product arguments
and the two finite sums of the Hahn-type identity used by the eighth moment. Everything
is arbitrary-precision integer or Fraction arithmetic; floating point never appears.
"""

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, prod
from typing import Sequence

from src.models.binomial import BinomialProduct
from src.utils.errors import EmbeddedEnsembleError


class InvalidCombinatorialArgumentError(EmbeddedEnsembleError):
    """Raised when arguments fall outside an operation's domain."""


def binomial(n: int, k: int) -> int:
    """
    C(n, k), zero outside 0 <= k <= n.

    The closed-form moments rely on C(m - jk, k) switching terms off, so out-of-range
    arguments (including negative n) give 0 instead of raising.

    Example:
        binomial(4, 2)  # 6
        binomial(1, 3)  # 0
    """
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


def multinomial(n: int, parts: Sequence[int]) -> int:
    """
    n! / (prod(parts_i!) * (n - sum(parts))!).

    The unlisted remainder n - sum(parts) is an implicit final part.

    Args:
        n: Total
        parts: Nonnegative listed parts

    Returns:
        Multinomial coefficient

    Raises:
        InvalidCombinatorialArgumentError: If a part is negative or the parts exceed n
    """
    if any(p < 0 for p in parts):
        raise InvalidCombinatorialArgumentError(f"negative part in {list(parts)}")
    remainder = n - sum(parts)
    if remainder < 0:
        raise InvalidCombinatorialArgumentError(
            f"parts {list(parts)} sum to more than {n}"
        )
    # Product of successive binomials keeps intermediates small
    value = 1
    available = n
    for p in parts:
        value *= comb(available, p)
        available -= p
    return value


def double_factorial_odd(n: int) -> int:
    """(2n - 1)!!, the number of perfect matchings of 2n items (1 for n = 0)."""
    if n < 0:
        raise InvalidCombinatorialArgumentError("n must be nonnegative")
    return prod(range(1, 2 * n, 2))


@lru_cache(maxsize=None)
def catalan(n: int) -> int:
    """C(2n, n) / (n + 1)."""
    if n < 0:
        raise InvalidCombinatorialArgumentError("n must be nonnegative")
    return comb(2 * n, n) // (n + 1)


def argument_of(product: BinomialProduct) -> int:
    """
    Power of l carried by a binomial product as l grows: sum of exponent * lower.

    Example:
        argument_of(BinomialProduct.of((0, m)))  # m, the argument of C(l, m)
    """
    return sum(f.exponent * f.lower for f in product.factors)


def leading_coefficient(product: BinomialProduct) -> Fraction:
    """Coefficient of l**argument in the product: prod 1/(lower!)**exponent."""
    return Fraction(1, prod(factorial(f.lower) ** f.exponent for f in product.factors))


def _check_hahn_domain(m: int, k: int) -> None:
    if k < 0 or 2 * k > m:
        raise InvalidCombinatorialArgumentError(
            f"Hahn sums need 0 <= 2k <= m, got m={m}, k={k}"
        )


def hahn_lhs(m: int, k: int) -> int:
    """sum_a C(m-k-a, k) * C(k, a) * C(m-2k, a)."""
    _check_hahn_domain(m, k)
    return sum(
        binomial(m - k - a, k) * binomial(k, a) * binomial(m - 2 * k, a)
        for a in range(k + 1)
    )


def hahn_rhs(m: int, k: int) -> int:
    """
    C(m-k, k) * sum_p C(k, p)^2 * C(m-2k, k-p) / C(m-k, p), evaluated exactly.

    Raises:
        InvalidCombinatorialArgumentError: Outside 0 <= 2k <= m
        ArithmeticError: If the rational sum is not an integer (the identity failed)
    """
    _check_hahn_domain(m, k)
    total = Fraction(0)
    for p in range(k + 1):
        total += Fraction(
            binomial(k, p) ** 2 * binomial(m - 2 * k, k - p), binomial(m - k, p)
        )
    value = binomial(m - k, k) * total
    if value.denominator != 1:
        raise ArithmeticError(f"Hahn right-hand side is not integral at m={m}, k={k}: {value}")
    return value.numerator


def vandermonde_holds(m: int, k: int) -> bool:
    """sum_w C(k, w) * C(m-2k, k-w) == C(m-k, k)."""
    return sum(
        binomial(k, w) * binomial(m - 2 * k, k - w) for w in range(k + 1)
    ) == binomial(m - k, k)
