"""
Tests for the particle diagram engine.

Tests tail contraction, loop enumeration, argument maximisation, symbolic certification
and assembly of limit moments from pairing classes.
"""

from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from src.models.diagram import BondKind
from src.models.pairing import PairingPartition
from src.services import diagram_service, formula_service
from src.services.combinatorics_service import binomial, multinomial
from src.services.diagram_service import (
    InfeasibleSystemError,
    SearchBudgetExceededError,
    UnsupportedOrderError,
)

OCTAHEDRON = PairingPartition(((1, 4), (2, 5), (3, 6)))
BOX = PairingPartition(((1, 5), (2, 6), (3, 7), (4, 8)))
TWO_TAILS = PairingPartition(((1, 2), (3, 4)))
CUBOID = PairingPartition(((1, 7), (2, 6), (3, 5), (4, 8)))


class TestPatternsAndTails:
    """Test A-factorisation and tail contraction."""

    def test_pattern_factors(self, standard_pairing: PairingPartition):
        pattern = diagram_service.pairing_to_pattern(standard_pairing)

        assert pattern.factors == ((1, 4, 3, 2), (2, 1, 4, 3))
        assert pattern.tail_factors == ()

    def test_adjacent_pairs_are_tails(self):
        pattern = diagram_service.pairing_to_pattern(PairingPartition(((1, 4), (2, 3))))

        assert pattern.tail_factors == (0, 1)

    def test_order_mismatch_rejected(self, standard_pairing: PairingPartition):
        with pytest.raises(UnsupportedOrderError):
            diagram_service.pairing_to_pattern(standard_pairing, 6)

    def test_non_crossing_core_is_empty(self):
        core, tails = diagram_service.contract_tails(PairingPartition(((1, 6), (2, 3), (4, 5))))

        assert core.pairs == ()
        assert tails == 3

    def test_tail_removal_renumbers_core(self):
        """
        Protects against: A core that keeps the slot labels of the full trace.
        """
        core, tails = diagram_service.contract_tails(PairingPartition(((1, 2), (3, 5), (4, 6))))

        assert core == PairingPartition(((1, 3), (2, 4)))
        assert tails == 1

    def test_dihedral_canonical(self):
        assert diagram_service.dihedral_canonical(PairingPartition(((1, 4), (2, 3)))) == TWO_TAILS
        assert diagram_service.dihedral_canonical(PairingPartition(())) == PairingPartition(())


class TestDiagramsAndLoops:
    """Test bond construction and loop enumeration."""

    def test_standard_diagram_bonds(self, standard_pairing: PairingPartition):
        diagram = diagram_service.build_diagram(diagram_service.pairing_to_pattern(standard_pairing))

        solids = [b for b in diagram.bonds if b.kind is BondKind.SOLID]
        dashed = [b for b in diagram.bonds if b.kind is BondKind.DASHED]
        assert len(solids) == 4
        assert len(dashed) == 4
        assert [b.name for b in dashed] == ["J1", "I1", "J2", "I2"]
        assert diagram.nodes == (1, 2, 3, 4)

    def test_standard_loops(self, standard_pairing: PairingPartition):
        """
        Test the ring, four two-bond loops and one loop winding three times.
        """
        loops = diagram_service.enumerate_loops(diagram_service.core_diagram(standard_pairing))

        assert len(loops) == 6
        assert sorted(loop.winding for loop in loops) == [1, 1, 1, 1, 1, 3]

    def test_prism_loops(self, prism_pairing: PairingPartition):
        loops = diagram_service.enumerate_loops(diagram_service.core_diagram(prism_pairing))

        assert len(loops) == 11

    def test_loops_listed_once(self, prism_pairing: PairingPartition):
        """
        Protects against: The same cycle being counted from each of its bonds.
        """
        loops = diagram_service.enumerate_loops(diagram_service.core_diagram(prism_pairing))

        assert len({frozenset(loop.bonds) for loop in loops}) == len(loops)

    def test_every_bond_is_covered(self, prism_pairing: PairingPartition):
        system = diagram_service.loop_system(diagram_service.core_diagram(prism_pairing))

        assert system.uncovered_bonds() == ()

    def test_empty_core_diagram(self):
        diagram = diagram_service.core_diagram(TWO_TAILS)

        assert diagram.bonds == ()
        assert diagram.tail_count == 2


class TestArgumentMaximisation:
    """Test maximal-argument loop sizes."""

    @pytest.mark.parametrize("m,k", [(2, 1), (4, 1), (6, 2), (9, 3)])
    def test_standard_diagram(self, standard_pairing: PairingPartition, m, k):
        """
        Test argument m + 2k with four loops of size k and the ring at m - 2k.
        """
        term = diagram_service.leading_term(standard_pairing, m, k)

        assert term.argument == m + 2 * k
        assert term.cost == 0
        assert len(term.solutions) == 1
        assert sorted(term.solutions[0]) == sorted([0, m - 2 * k] + [k] * 4)

    def test_standard_diagram_beyond_threshold_loses_argument(self, standard_pairing: PairingPartition):
        term = diagram_service.leading_term(standard_pairing, 3, 2)

        assert term.cost > 0
        assert term.argument < 3 + 2 * 2

    @pytest.mark.parametrize("l,m,k", [(10, 4, 1), (12, 5, 2), (16, 6, 3), (30, 10, 4)])
    def test_prism_value(self, prism_pairing: PairingPartition, l, m, k):
        """
        Protects against: Missing solutions of the one-parameter prism family.
        """
        term = diagram_service.leading_term(prism_pairing, m, k)

        value = diagram_service.leading_term_value(term, l)

        assert term.argument == m + 3 * k
        assert value == multinomial(l, [k, k, k, k, m - k]) * binomial(m - k, k) ** 2

    def test_prism_has_free_parameter(self, prism_pairing: PairingPartition):
        term = diagram_service.leading_term(prism_pairing, 9, 3)

        assert len(term.solutions) > 1
        assert term.free_parameters

    @pytest.mark.parametrize("l,m,k", [(20, 5, 1), (30, 8, 2), (24, 9, 2)])
    def test_box_value(self, l, m, k):
        """
        Test that the fully crossing order-8 diagram has one optimal configuration worth
        multinomial(l; m - 4k, k x 8).
        """
        term = diagram_service.leading_term(BOX, m, k)

        assert term.argument == m + 4 * k
        assert len(term.solutions) == 1
        assert diagram_service.leading_term_value(term, l) == multinomial(l, [m - 4 * k] + [k] * 8)

    def test_cuboid_has_two_free_parameters(self):
        """
        Protects against: Optimal families collapsing to a line or a point.
        """
        # Given the cuboid diagram well inside its region
        term = diagram_service.leading_term(CUBOID, 12, 2)

        # When measuring the dimension of the optimal family
        offsets = np.array(term.solutions) - np.array(term.solutions[0])

        # Then the full argument m + 4k is attained on a two-parameter family
        assert term.argument == 12 + 4 * 2
        assert term.cost == 0
        assert np.linalg.matrix_rank(offsets) == 2

    def test_leading_term_carries_certified_argument(self, standard_pairing: PairingPartition):
        """
        Test that the concrete argument matches the symbolic one inside the region and falls
        below it outside.
        """
        m_symbol, k_symbol = sp.symbols("m k", integer=True, nonnegative=True)

        inside = diagram_service.leading_term(standard_pairing, 4, 1)
        outside = diagram_service.leading_term(standard_pairing, 3, 2)

        assert str(inside.symbolic_argument) == "2*k + m"
        assert inside.validity == "m >= 2*k"
        assert inside.symbolic_argument.subs({m_symbol: 4, k_symbol: 1}) == inside.argument
        assert outside.argument < outside.symbolic_argument.subs({m_symbol: 3, k_symbol: 2})
        assert inside.to_dict()["validity"] == "m >= 2*k"

    def test_standard_leading_term_value(self, standard_pairing: PairingPartition):
        term = diagram_service.leading_term(standard_pairing, 4, 1)

        assert diagram_service.leading_term_value(term, 10) == 75600

    def test_tails_multiply_value(self):
        term = diagram_service.leading_term(TWO_TAILS, 2, 1)

        assert term.argument == 2 + 2 * 1
        assert diagram_service.leading_term_value(term, 5) == diagram_service.tail_factor(5, 2, 1) ** 2 * 10

    def test_value_at_other_point_rejected(self, standard_pairing: PairingPartition):
        term = diagram_service.leading_term(standard_pairing, 4, 1)

        with pytest.raises(InfeasibleSystemError):
            diagram_service.leading_term_value(term, 10, m=5)

    def test_k_exceeding_m_rejected(self, standard_pairing: PairingPartition):
        with pytest.raises(InfeasibleSystemError):
            diagram_service.leading_term(standard_pairing, 2, 3)

    def test_search_budget(self, prism_pairing: PairingPartition):
        """
        Protects against: Exhaustive searches that ignore the node cap.
        """
        system = diagram_service.loop_system(diagram_service.core_diagram(prism_pairing))

        with pytest.raises(SearchBudgetExceededError) as excinfo:
            diagram_service.maximize_argument(system, 9, 3, node_budget=1)

        assert excinfo.value.exit_status == 3


class TestCertification:
    """Test the symbolic argument and its validity region."""

    @pytest.mark.parametrize(
        "pairing,threshold",
        [
            (PairingPartition(((1, 3), (2, 4))), 2),
            (PairingPartition(((1, 3), (2, 5), (4, 6))), 2),
            (OCTAHEDRON, 3),
            (BOX, 4),
            (TWO_TAILS, 0),
        ],
    )
    def test_thresholds(self, pairing, threshold):
        certificate = diagram_service.certify_argument(pairing, max_m=8)

        assert certificate.threshold == threshold
        assert str(certificate.argument) == f"{pairing.slots // 2}*k + m"

    def test_standard_certificate(self, standard_pairing: PairingPartition):
        certificate = diagram_service.certify_argument(standard_pairing, max_m=6)

        assert certificate.to_dict() == {
            "argument": "2*k + m",
            "region": "m >= 2*k",
            "threshold": 2,
            "points_checked": 21,
        }


class TestClassesAndMoments:
    """Test pairing classes and moment assembly."""

    @pytest.mark.parametrize(
        "n2,expected",
        [(4, [1, 2]), (6, [1, 2, 3, 3, 6]), (8, [1, 2, 4, 4, 4, 8, 8, 8, 14, 24, 28])],
    )
    def test_multiplicities(self, n2, expected):
        """
        Protects against: Classes that lose or double count pairings.
        """
        found = sorted(count for _, count in diagram_service.canonical_classes(n2))

        assert found == expected
        assert sum(found) == formula_service.gaussian_moment(n2 // 2)

    def test_unsupported_order(self):
        with pytest.raises(UnsupportedOrderError):
            diagram_service.canonical_classes(10)

    def test_class_limits(self, standard_pairing: PairingPartition):
        assert diagram_service.class_limit(standard_pairing, 4, 1) == Fraction(3, 4)
        assert diagram_service.class_limit(TWO_TAILS, 4, 1) == 1
        assert diagram_service.class_limit(standard_pairing, 3, 2) == 0

    @pytest.mark.parametrize("m,k", [(1, 0), (4, 1), (5, 2), (6, 2), (7, 3), (9, 2), (12, 4)])
    def test_assembly_matches_closed_forms(self, m, k):
        for n in (2, 3, 4):
            assert diagram_service.assemble_moment(n, m, k) == formula_service.nth_moment_limit(n, m, k)


class TestReports:
    def test_report_without_point(self):
        report = diagram_service.diagram_report(4)

        assert report["order"] == 4
        assert len(report["classes"]) == 2
        assert "moment" not in report

    def test_report_with_point_and_levels(self):
        report = diagram_service.diagram_report(4, 4, 1, 10)

        assert report["moment"] == Fraction(11, 4)
        standard = next(c for c in report["classes"] if c["tail_count"] == 0)
        assert standard["leading_term_value"] == 75600
        assert standard["certificate"]["threshold"] == 2

    def test_render(self):
        text = diagram_service.render_report(diagram_service.diagram_report(4, 4, 1))

        assert text.startswith("Order 4: 2 classes")
        assert "Moment at m=4, k=1: 11/4" in text
