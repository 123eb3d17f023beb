"""
Tests for the normal-distribution helpers and exact rational utilities.
"""
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.special import ndtr

from blurreg.core.normal import invert_increasing, norm_cdf, norm_isf, norm_ppf, norm_sf
from blurreg.core.rationals import (
    format_rational,
    from_numerators,
    on_grid,
    round_half_even,
    to_fraction,
    to_numerators,
)


class TestNormal:
    """Φ and Φ⁻¹."""

    @pytest.mark.parametrize("x", [-8.0, -3.0, -0.5, 0.0, 0.3, 1.0, 2.5, 6.0])
    def test_cdf_matches_scipy(self, x):
        assert norm_cdf(x) == pytest.approx(float(ndtr(x)), abs=1e-15)

    def test_tails_keep_relative_precision(self):
        assert norm_sf(10.0) == pytest.approx(7.61985302416047e-24, rel=1e-12)
        assert norm_cdf(-10.0) == pytest.approx(7.61985302416047e-24, rel=1e-12)

    @given(st.floats(min_value=1e-12, max_value=1 - 1e-12))
    @settings(max_examples=200, deadline=None)
    def test_ppf_inverts_cdf(self, p):
        assert norm_cdf(norm_ppf(p)) == pytest.approx(p, rel=1e-8, abs=1e-15)

    def test_isf_avoids_cancellation(self):
        q = 1.0 / 512
        assert norm_isf(q) == pytest.approx(-norm_ppf(q), abs=1e-10)
        assert norm_isf(1e-20) == pytest.approx(9.262340089798408, abs=1e-8)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_ppf_domain(self, p):
        with pytest.raises(ValueError):
            norm_ppf(p)

    @pytest.mark.parametrize("p", [1e-300, 1.0 / 512, 0.25, 0.5, 0.9, 1 - 1e-12])
    def test_ppf_matches_scipy_stats(self, p):
        assert norm_ppf(p) == pytest.approx(float(stats.norm.ppf(p)), abs=1e-12)
        assert norm_isf(p) == pytest.approx(float(stats.norm.isf(p)), abs=1e-9)

    def test_invert_increasing_expands_bracket(self):
        root = invert_increasing(lambda z: z ** 3, 27.0)
        assert root == pytest.approx(3.0, abs=1e-9)

    def test_invert_increasing_on_mixture(self):
        def mixture(z):
            return 0.5 * norm_cdf(z / 0.1) + 0.5 * norm_cdf(z / 0.3)

        root = invert_increasing(mixture, 1.0 / 512, tol=1e-12)

        assert mixture(root) == pytest.approx(1.0 / 512, rel=1e-9)
        assert root < 0

    def test_invert_increasing_without_bracket(self):
        with pytest.raises(ValueError, match="no upper bracket"):
            invert_increasing(lambda z: 0.0, 1.0)


class TestRationals:
    """Exact 1/256 helpers."""

    @pytest.mark.parametrize(
        "value,expected",
        [(Fraction(5, 2), 2), (Fraction(7, 2), 4), (Fraction(-5, 2), -2), (Fraction(13, 5), 3), (Fraction(-13, 5), -3)],
    )
    def test_round_half_even(self, value, expected):
        assert round_half_even(value) == expected

    def test_to_fraction_is_exact(self):
        assert to_fraction("144/256") == Fraction(9, 16)
        assert to_fraction("0.1") == Fraction(1, 10)
        assert to_fraction(0.5) == Fraction(1, 2)
        with pytest.raises(TypeError):
            to_fraction(True)
        with pytest.raises(ValueError):
            to_fraction("half")

    def test_grid_membership(self):
        assert on_grid(Fraction(3, 256))
        assert not on_grid(Fraction(1, 512))
        assert from_numerators([144, -205]) == (Fraction(144, 256), Fraction(-205, 256))
        assert to_numerators([Fraction(9, 16)]) == (144,)
        with pytest.raises(ValueError):
            to_numerators([Fraction(1, 3)])

    def test_format_rational(self):
        assert format_rational(Fraction(9, 16)) == "144/256"
        assert format_rational(Fraction(-2)) == "-512/256"
        assert format_rational(Fraction(682, 2483)) == "682/2483"


if __name__ == "__main__":
    pytest.main(["-v", __file__])
