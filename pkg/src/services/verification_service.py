"""
Verification suite.

Exact identities between the Wick oracle, the closed forms and the diagram engine, each
reported as a named pass/fail check. Backs the `verify` command.
"""

from typing import Callable, Optional

import numpy as np
from sqlalchemy.orm import Session

from src.models.fock import Statistics
from src.models.pairing import PairingPartition
from src.models.reports import CheckResult
from src.services import diagram_service, formula_service, fock_service, wick_oracle_service
from src.services.combinatorics_service import binomial, catalan, hahn_lhs, hahn_rhs, multinomial
from src.utils.config_loader import config
from src.utils.logger import logger

STANDARD = PairingPartition(((1, 3), (2, 4)))
PRISM = PairingPartition(((1, 3), (2, 5), (4, 6)))

TraceFn = Callable[[int, int, int, int], int]


def _trace_function(db: Optional[Session], budget: Optional[int], strategy: Optional[str] = None) -> TraceFn:
    def trace(l: int, m: int, k: int, n2: int) -> int:
        if db is not None and strategy is None:
            return wick_oracle_service.cached_exact_even_trace(db, l, m, k, n2, budget=budget)
        return wick_oracle_service.exact_even_trace(l, m, k, n2, strategy=strategy, budget=budget)

    return trace


def check_second_trace(max_dim: int, budget: Optional[int] = None) -> CheckResult:
    """
    Brute-force tr(H^2) equals C(l,m) C(m,k) C(l-m+k,k) at every point with C(l,m) <= max_dim.

    C(l,1) = l, so no level count above max_dim has a basis in range other than the
    one-state m = 0 and m = l bases.
    """
    trace = _trace_function(None, budget, strategy="full_basis")
    failures, checked = [], 0
    for l in range(1, max_dim + 1):
        for m in range(0, l + 1):
            if binomial(l, m) > max_dim:
                continue
            for k in range(0, m + 1):
                checked += 1
                expected = wick_oracle_service.second_trace_closed_form(l, m, k)
                value = trace(l, m, k, 2)
                if value != expected:
                    failures.append({"l": l, "m": m, "k": k, "value": value, "expected": expected})
    return CheckResult("second_trace_identity", not failures, checked, {"failures": failures})


def check_km_polynomials(trace: TraceFn, max_dim: int = 20) -> CheckResult:
    """At k = m the exact traces are 2N^3 + N and 5N^4 + 10N^2; the order-8 leading coefficient is 14."""
    failures, checked = [], 0
    polynomials = {n2: wick_oracle_service.km_trace_polynomial(n2) for n2 in (4, 6)}
    expected_polynomials = {4: {3: 2, 1: 1}, 6: {4: 5, 2: 10}}
    for n2, polynomial in polynomials.items():
        if polynomial != expected_polynomials[n2]:
            failures.append({"n2": n2, "polynomial": polynomial})
    for l in range(1, 9):
        for m in range(1, l + 1):
            size = binomial(l, m)
            if size > max_dim:
                continue
            for n2, polynomial in polynomials.items():
                checked += 1
                value = trace(l, m, m, n2)
                expected = wick_oracle_service.evaluate_trace_polynomial(polynomial, size)
                if value != expected:
                    failures.append({"l": l, "m": m, "n2": n2, "value": value, "expected": expected})
    leading = wick_oracle_service.km_trace_polynomial(8).get(5)
    if leading != 14:
        failures.append({"n2": 8, "leading_coefficient": leading})
    return CheckResult("km_trace_polynomials", not failures, checked + 1, {"failures": failures})


def check_endpoints(max_m: int = 40) -> CheckResult:
    """Gaussian values 3/15/105 at k = 0 and Catalan values 2/5/14 whenever 2k > m."""
    failures, checked = [], 0
    for m in range(0, max_m + 1):
        for k in range(0, m + 1):
            if k and 2 * k <= m:
                continue
            for n in (2, 3, 4):
                checked += 1
                value = formula_service.nth_moment_limit(n, m, k)
                expected = formula_service.gaussian_moment(n) if k == 0 else formula_service.semicircle_moment(n)
                if value != expected:
                    failures.append({"m": m, "k": k, "n": n, "value": value})
    return CheckResult("closed_form_endpoints", not failures, checked, {"failures": failures})


def check_hahn_lemma(max_m: int = 30) -> CheckResult:
    failures, checked = [], 0
    for m in range(0, max_m + 1):
        for k in range(0, m // 2 + 1):
            checked += 1
            left, right = hahn_lhs(m, k), hahn_rhs(m, k)
            if left != right:
                failures.append({"m": m, "k": k, "lhs": left, "rhs": right})
    return CheckResult("hahn_lemma", not failures, checked, {"failures": failures})


def random_points(count: int, seed: int, max_m: int = 14) -> list[tuple[int, int]]:
    """Deterministic sample of (m, k) pairs with 1 <= m <= max_m and 0 <= k <= m."""
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(count):
        m = int(rng.integers(1, max_m + 1))
        points.append((m, int(rng.integers(0, m + 1))))
    return points


def check_diagram_equivalence(points: list[tuple[int, int]]) -> CheckResult:
    """Diagram assembly equals the closed forms; class multiplicities match the known lists."""
    failures, checked = [], 0
    expected_multiplicities = {4: [1, 2], 6: [1, 2, 3, 3, 6], 8: [1, 2, 4, 4, 4, 8, 8, 8, 14, 24, 28]}
    for n2, expected in expected_multiplicities.items():
        found = sorted(count for _, count in diagram_service.canonical_classes(n2))
        checked += 1
        if found != expected:
            failures.append({"n2": n2, "multiplicities": found})
    for m, k in points:
        for n in (2, 3, 4):
            checked += 1
            assembled = diagram_service.assemble_moment(n, m, k)
            closed = formula_service.nth_moment_limit(n, m, k)
            if assembled != closed:
                failures.append({"m": m, "k": k, "n": n, "assembled": assembled, "closed_form": closed})
    return CheckResult("diagram_equivalence", not failures, checked, {"failures": failures})


def check_loop_solutions() -> CheckResult:
    """Standard diagram argument and loop sizes; prism value C(l;k,k,k,k,m-k) C(m-k,k)^2."""
    failures, checked = [], 0
    for m, k in [(2, 1), (4, 1), (5, 2), (6, 2), (9, 3)]:
        checked += 1
        term = diagram_service.leading_term(STANDARD, m, k)
        sizes = sorted(term.solutions[0])
        expected = sorted([0, m - 2 * k] + [k] * 4)
        if term.argument != m + 2 * k or len(term.solutions) != 1 or sizes != expected:
            failures.append({"diagram": "standard", "m": m, "k": k, "term": term.to_dict()})
    for l, m, k in [(10, 4, 1), (12, 4, 1), (12, 5, 2), (14, 4, 2), (15, 6, 2),
                    (16, 6, 3), (18, 7, 2), (20, 8, 3), (24, 9, 3), (30, 10, 4)]:
        checked += 1
        term = diagram_service.leading_term(PRISM, m, k)
        value = diagram_service.leading_term_value(term, l)
        expected = multinomial(l, [k, k, k, k, m - k]) * binomial(m - k, k) ** 2
        if term.argument != m + 3 * k or value != expected:
            failures.append({"diagram": "prism", "l": l, "m": m, "k": k, "value": value, "expected": expected})
    return CheckResult("loop_solutions", not failures, checked, {"failures": failures})


def check_dyck(max_n: int = 12) -> CheckResult:
    failures, checked = [], 0
    for n in range(0, max_n + 1):
        checked += 1
        if len(wick_oracle_service.dyck_words(n)) != catalan(n):
            failures.append({"n": n})
    for n2 in (2, 4, 6, 8, 10):
        checked += 1
        if len(wick_oracle_service.non_crossing_pairings(n2)) != catalan(n2 // 2):
            failures.append({"non_crossing": n2})
    words = []
    for pairs in (((1, 2), (3, 4)), ((1, 4), (2, 3))):
        cycles = wick_oracle_service.pairing_to_cycles(PairingPartition(pairs))
        words.append(str(wick_oracle_service.cycle_to_dyck(cycles)))
    checked += 1
    if words != ["XXYYXY", "XYXXYY"]:
        failures.append({"translations": words})
    return CheckResult("dyck_catalan", not failures, checked, {"failures": failures})


def check_bosonic_sizes(max_levels: int = 12, enumerate_up_to: int = 2000) -> CheckResult:
    failures, checked = [], 0
    for l in range(1, max_levels + 1):
        for m in range(0, max_levels + 1):
            checked += 1
            size = fock_service.bosonic_basis_size(l, m)
            expected = binomial(l + m - 1, m) if m else 1
            if size != expected:
                failures.append({"l": l, "m": m, "size": size})
            if size != fock_service.bosonic_basis_size_by_occupied_levels(l, m):
                failures.append({"l": l, "m": m, "by_occupied_levels": True})
            if size <= enumerate_up_to:
                enumerated = len(fock_service.enumerate_basis(l, m, Statistics.BOSONIC))
                if enumerated != size:
                    failures.append({"l": l, "m": m, "enumerated": enumerated})
    return CheckResult("bosonic_basis_sizes", not failures, checked, {"failures": failures})


def check_hahn_prefactor(points: list[tuple[int, int]]) -> CheckResult:
    """
    The corrected Hahn prefactor reproduces the diagram assembly; the printed one is reported.

    Passes when the corrected eighth moment equals the assembled one at every point.
    """
    disagreements, failures = [], []
    for m, k in points:
        corrected = formula_service.eighth_moment_limit(m, k, "corrected")
        printed = formula_service.eighth_moment_limit(m, k, "printed")
        assembled = diagram_service.assemble_moment(4, m, k)
        if corrected != assembled:
            failures.append({"m": m, "k": k, "corrected": corrected, "assembled": assembled})
        if printed != assembled:
            disagreements.append({"m": m, "k": k, "printed": printed, "assembled": assembled})
    return CheckResult(
        "hahn_prefactor_comparison",
        not failures,
        len(points),
        {"failures": failures, "printed_disagreements": len(disagreements), "printed_examples": disagreements[:5]},
    )


def run_suite(
    max_dim: Optional[int] = None,
    budget: Optional[int] = None,
    db: Optional[Session] = None,
) -> list[CheckResult]:
    """
    Run every identity check.

    Args:
        max_dim: Largest basis used by oracle checks (defaults to verify.max_dim)
        budget: Oracle operation budget per trace
        db: Session for the exact-trace cache (no caching when None)

    Returns:
        One CheckResult per identity, in a fixed order

    Raises:
        OracleBudgetExceededError: If an oracle check overruns its budget
    """
    max_dim = max_dim or config.get_int("verify.max_dim", 70)
    points = random_points(
        config.get_int("verify.randomized_pairs", 50),
        config.get_int("verify.seed", 7),
        config.get_int("diagrams.certification_max_m", 14),
    )
    trace = _trace_function(db, budget)
    checks = [
        lambda: check_second_trace(max_dim, budget),
        lambda: check_km_polynomials(trace, min(max_dim, 20)),
        check_endpoints,
        check_hahn_lemma,
        lambda: check_diagram_equivalence(points),
        check_loop_solutions,
        check_dyck,
        check_bosonic_sizes,
        lambda: check_hahn_prefactor(points),
    ]
    results = []
    for check in checks:
        result = check()
        if result.passed:
            logger.info(f"Check {result.name} passed ({result.checked} cases)")
        else:
            logger.error(f"Check {result.name} FAILED: {len(result.detail.get('failures', []))} failures")
        results.append(result)
    return results


def suite_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results)
