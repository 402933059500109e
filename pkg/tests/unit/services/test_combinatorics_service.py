"""
Tests for exact combinatorics.
"""

from fractions import Fraction

import pytest

from src.models.binomial import BinomialProduct
from src.services.combinatorics_service import (
    InvalidCombinatorialArgumentError,
    argument_of,
    binomial,
    catalan,
    double_factorial_odd,
    hahn_lhs,
    hahn_rhs,
    leading_coefficient,
    multinomial,
    vandermonde_holds,
)


class TestBinomial:
    def test_values(self):
        assert binomial(4, 2) == 6
        assert binomial(60, 30) == 118264581564861424

    @pytest.mark.parametrize("n,k", [(1, 3), (5, -1), (-2, 1)])
    def test_out_of_range_is_zero(self, n, k):
        """
        Protects against: C(m - jk, k) raising instead of switching a correction term off.
        """
        assert binomial(n, k) == 0


class TestMultinomial:
    def test_remainder_is_implicit_part(self):
        """
        Test multinomial(10; 2,1,1,1,1) = 10!/(2! 4!) = 75600.

        Protects against: Forgetting the (n - sum parts)! factor.
        """
        assert multinomial(10, [2, 1, 1, 1, 1]) == 75600

    def test_single_part_is_binomial(self):
        assert multinomial(12, [4]) == binomial(12, 4)

    def test_empty_parts(self):
        assert multinomial(7, []) == 1

    def test_negative_part_rejected(self):
        with pytest.raises(InvalidCombinatorialArgumentError):
            multinomial(5, [2, -1])

    def test_parts_exceeding_total_rejected(self):
        with pytest.raises(InvalidCombinatorialArgumentError):
            multinomial(3, [2, 2])


class TestSequences:
    def test_double_factorial(self):
        assert [double_factorial_odd(n) for n in range(5)] == [1, 1, 3, 15, 105]

    def test_catalan(self):
        assert [catalan(n) for n in range(6)] == [1, 1, 2, 5, 14, 42]
        assert catalan(10) == 16796

    def test_negative_rejected(self):
        with pytest.raises(InvalidCombinatorialArgumentError):
            catalan(-1)
        with pytest.raises(InvalidCombinatorialArgumentError):
            double_factorial_odd(-1)


class TestBinomialProducts:
    def test_argument_and_leading_coefficient(self):
        """
        Test C(l,2) * C(l-2,1)^2 grows like l^4 / 2.
        """
        product = BinomialProduct.of((0, 2), (2, 1, 2))

        assert argument_of(product) == 4
        assert leading_coefficient(product) == Fraction(1, 2)

    def test_empty_product(self):
        assert argument_of(BinomialProduct()) == 0
        assert leading_coefficient(BinomialProduct()) == 1


class TestHahnIdentity:
    """Test the two sides of the Hahn-type summation identity."""

    def test_value_at_four_one(self):
        assert hahn_lhs(4, 1) == 7
        assert hahn_rhs(4, 1) == 7

    @pytest.mark.parametrize("m", range(0, 21))
    def test_sides_agree(self, m):
        """
        Protects against: An eighth-moment Hahn term built on a false identity.
        """
        for k in range(0, m // 2 + 1):
            assert hahn_lhs(m, k) == hahn_rhs(m, k)

    def test_k_zero(self):
        assert hahn_lhs(6, 0) == 1

    def test_domain(self):
        with pytest.raises(InvalidCombinatorialArgumentError):
            hahn_lhs(3, 2)
        with pytest.raises(InvalidCombinatorialArgumentError):
            hahn_rhs(4, -1)

    @pytest.mark.parametrize("m,k", [(4, 1), (9, 3), (12, 4), (20, 6)])
    def test_vandermonde(self, m, k):
        assert vandermonde_holds(m, k)
