"""
Closed-form limit moments.

The l -> infinity normalised moments of the fermionic eGUE level density as exact
rationals in (m, k), plus the Gaussian and semicircle reference values they interpolate
between. Every correction term carries a factor C(m-k, k), so all of them vanish in the
canonical domain 2k > m and the moments lock to the Catalan numbers there.
"""

from fractions import Fraction
from typing import Optional

from src.models.reports import MomentFormulaResult
from src.services.combinatorics_service import (
    InvalidCombinatorialArgumentError,
    binomial,
    catalan,
    double_factorial_odd,
    hahn_lhs,
    multinomial,
)
from src.utils.config_loader import config

GAUSSIAN_ENDPOINT = "gaussian endpoint"
CRITICAL = "critical"
CANONICAL = "canonical"

HAHN_PREFACTORS = ("corrected", "printed")


def _check(m: int, k: int) -> None:
    if k < 0 or k > m:
        raise InvalidCombinatorialArgumentError(f"need 0 <= k <= m, got m={m}, k={k}")


def _ratios(m: int, k: int) -> tuple[Fraction, Fraction, Fraction]:
    """C(m-jk, k) / C(m, k) for j = 1, 2, 3."""
    c = binomial(m, k)
    return tuple(Fraction(binomial(m - j * k, k), c) for j in (1, 2, 3))


def gaussian_moment(n: int) -> int:
    """(2n - 1)!!"""
    if n < 1:
        raise InvalidCombinatorialArgumentError("n must be at least 1")
    return double_factorial_odd(n)


def semicircle_moment(n: int) -> int:
    """catalan(n)"""
    if n < 1:
        raise InvalidCombinatorialArgumentError("n must be at least 1")
    return catalan(n)


def fourth_moment_limit(m: int, k: int) -> Fraction:
    """
    kappa = 2 + C(m-k,k)/C(m,k).

    Example:
        fourth_moment_limit(4, 1)  # Fraction(11, 4)
    """
    _check(m, k)
    r1, _, _ = _ratios(m, k)
    return 2 + r1


def sixth_moment_limit(m: int, k: int) -> Fraction:
    """h = 5 + r1*r2 + 6*r1 + 3*r1**2 with rj = C(m-jk,k)/C(m,k)."""
    _check(m, k)
    r1, r2, _ = _ratios(m, k)
    return 5 + r1 * r2 + 6 * r1 + 3 * r1 * r1


def hahn_term(m: int, k: int, prefactor: str = "corrected") -> Fraction:
    """
    The Hahn-type contribution to the eighth moment.

    corrected: 2 * C(m-k,k)/C(m,k)**3 * sum_a C(m-k-a,k) C(m-2k,a) C(k,a)
    printed:   2/C(m,k)**3 * sum_a C(m-k-a,k)**2 C(m-2k,a) C(k,a), the prefactor binomial
               taken inside the sum with the summation index.
    """
    _check(m, k)
    if prefactor not in HAHN_PREFACTORS:
        raise InvalidCombinatorialArgumentError(f"unknown Hahn prefactor {prefactor!r}")
    c = binomial(m, k)
    c1 = binomial(m - k, k)
    if c1 == 0:
        return Fraction(0)
    if prefactor == "corrected":
        total = hahn_lhs(m, k) if 2 * k <= m else 0
        return Fraction(2 * c1 * total, c**3)
    total = sum(
        binomial(m - k - a, k) ** 2 * binomial(m - 2 * k, a) * binomial(k, a)
        for a in range(k + 1)
    )
    return Fraction(2 * total, c**3)


def eighth_moment_limit(m: int, k: int, hahn_prefactor: Optional[str] = None) -> Fraction:
    """
    tau, the eleven-term eighth moment.

    14 + r1 r2 r3 + 4 r1 r2**2 + 8 r1 r2 + 8 r1**2 r2 + 8 r1**3 + 4 r1**2 + 28 r1
    + 24 r1**2 + 4 r1**3 + Hahn term

    Args:
        m: Particle count
        k: Interaction rank
        hahn_prefactor: "corrected" (default from formulas.hahn_prefactor) or "printed"
    """
    _check(m, k)
    prefactor = hahn_prefactor or str(config.get("formulas.hahn_prefactor", "corrected"))
    r1, r2, r3 = _ratios(m, k)
    return (
        14
        + r1 * r2 * r3
        + 4 * r1 * r2 * r2
        + 8 * r1 * r2
        + 8 * r1 * r1 * r2
        + 8 * r1**3
        + 4 * r1 * r1
        + 28 * r1
        + 24 * r1 * r1
        + 4 * r1**3
        + hahn_term(m, k, prefactor)
    )


def nth_moment_limit(n: int, m: int, k: int) -> Fraction:
    """Dispatch to the 2n-th moment limit for n in {2, 3, 4}."""
    limits = {2: fourth_moment_limit, 3: sixth_moment_limit, 4: eighth_moment_limit}
    if n not in limits:
        raise InvalidCombinatorialArgumentError(f"closed forms exist for n in 2..4, got {n}")
    return limits[n](m, k)


def classify_regime(m: int, k: int) -> str:
    _check(m, k)
    if k == 0:
        return GAUSSIAN_ENDPOINT
    return CANONICAL if 2 * k > m else CRITICAL


def moment_result(n: int, m: int, k: int) -> MomentFormulaResult:
    return MomentFormulaResult(order=2 * n, value=nth_moment_limit(n, m, k), regime=classify_regime(m, k))


def kink_points(m: int, n: int) -> list[int]:
    """
    k values at which a correction of the 2n-th moment first vanishes identically.

    The term carrying C(m - (j-1)k, k) dies once k > m/j, i.e. from k = floor(m/j) + 1, for
    j = 2..n. Thresholds above m are dropped.
    """
    if m < 1 or n < 2:
        raise InvalidCombinatorialArgumentError("need m >= 1 and n >= 2")
    return sorted({m // j + 1 for j in range(2, n + 1) if m // j + 1 <= m})


def dilute_limit_value(n: int) -> int:
    """The k = 1, m -> infinity value (2n - 1)!!; every ratio rj tends to 1."""
    return gaussian_moment(n)


def coefficient_sum(n: int) -> int:
    """Sum of the closed-form coefficients with every ratio set to 1 (Hahn sum counts 2)."""
    sums = {2: 1 + 2, 3: 5 + 1 + 6 + 3, 4: 14 + 1 + 4 + 8 + 8 + 8 + 4 + 28 + 24 + 4 + 2}
    if n not in sums:
        raise InvalidCombinatorialArgumentError(f"closed forms exist for n in 2..4, got {n}")
    return sums[n]


def universal_term(l: int, m: int, k: int, n: int) -> int:
    """multinomial(l; m - nk, k, ..., k) with 2n copies of k; zero when nk > m."""
    if n * k > m:
        return 0
    return multinomial(l, [m - n * k] + [k] * (2 * n))
