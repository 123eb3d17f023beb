"""
Tests for the deformation, measurement and difference matrices.
"""
from fractions import Fraction

import numpy as np
import pytest

from blurreg.core.blur_matrices import (
    BlurRegime,
    ColumnForm,
    ProductLabel,
    blur_bound_check,
    build_matrices,
    classify_product,
    classify_regime,
    column_form,
    deformation_matrix,
    difference_matrix,
    measurement_matrix,
    no_blur_measurement_matrix,
    nu_threshold,
)
from blurreg.core.errors import RegimeError
from blurreg.core.signal_model import (
    BlurModel,
    PiecewiseConstantSignal,
    QuantizedSequence,
    SamplingGrid,
    difference_vector,
    large_sigma,
    region_counts,
    sample_sequence,
    tiny_sigma,
)

# |Δ| -> bracket the threshold must fall in
NU_TABLE = {
    1: (2.88, 2.89),
    2: (3.07, 3.1),
    4: (3.26, 3.3),
    8: (3.45, 3.49),
    16: (3.65, 3.7),
    32: (3.8, 3.85),
    64: (4.0, 4.05),
    128: (4.15, 4.2),
    256: (4.3, 4.35),
    512: (4.45, 4.5),
}

D1_AT_ZERO_NOISE = (0, 144, 112, 0, -512, 0, 272, 240, 0, -512, 0, 256, 0)


@pytest.fixture
def seq1_matrices(example_signal, example_blur, example_grids, example_gammas):
    return build_matrices(example_signal, example_blur, example_grids[0], example_gammas[0])


class TestThresholds:
    """ν thresholds and the blur bound."""

    @pytest.mark.parametrize("delta,bracket", sorted(NU_TABLE.items()))
    def test_nu_table(self, delta, bracket):
        lo, hi = bracket
        assert lo < nu_threshold(delta) < hi

    def test_nu_is_increasing(self):
        values = [nu_threshold(d) for d in sorted(NU_TABLE)]
        assert all(a < b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("delta", [0, -1, "0"])
    def test_nu_rejects_nonpositive(self, delta):
        with pytest.raises(ValueError):
            nu_threshold(delta)

    def test_blur_bound(self, example_signal):
        ok = blur_bound_check(example_signal, BlurModel.gaussian(0.125))
        too_wide = blur_bound_check(example_signal, BlurModel.gaussian(0.2))

        assert ok.holds and ok.margin > 0
        assert ok.bound == pytest.approx(0.5 / nu_threshold(2))
        assert not too_wide
        assert blur_bound_check(example_signal, BlurModel.gaussian(1e-6))

    def test_blur_bound_mixture_uses_widest_component(self, example_signal):
        blur = BlurModel.mixture([("1/2", 0.05), ("1/2", 0.2)])
        assert not blur_bound_check(example_signal, blur)


class TestDeformationMatrix:
    def test_entries(self, example_signal, example_blur, example_grids):
        tilde = deformation_matrix(example_signal, example_blur, example_grids[0])

        assert tilde.shape == (13, 5)
        assert tilde.entries[1, 0] == pytest.approx(0.5636, abs=1e-4)

    def test_identical_mixture_equals_pure(self, example_signal, example_grids):
        pure = deformation_matrix(example_signal, BlurModel.gaussian(0.125), example_grids[0])
        mixed = deformation_matrix(
            example_signal, BlurModel.mixture([("1/2", 0.125), ("1/2", 0.125)]), example_grids[0]
        )
        np.testing.assert_allclose(mixed.entries, pure.entries, atol=1e-15)


class TestMeasurementMatrix:
    """Exact measurement matrix and its column forms."""

    def test_identity_holds_exactly(self, example_signal, seq1_matrices, example_gammas):
        M, _ = seq1_matrices
        assert M.apply(difference_vector(example_signal)) == tuple(example_gammas[0])

    def test_example_columns(self, seq1_matrices):
        M, _ = seq1_matrices

        assert M.regime is BlurRegime.DISCERNIBLE
        assert M.at(1, 0) == Fraction(144, 256)
        assert M.column(1) == tuple(Fraction(0) if i <= 3 else Fraction(1) for i in range(13))
        assert M.at(6, 2) == Fraction(136, 256)
        assert M.column_forms == (
            ColumnForm.F_FORM, ColumnForm.PURE, ColumnForm.F_FORM, ColumnForm.PURE, ColumnForm.PURE
        )
        assert M.iota == (1, 4, 6, 9, 11)
        assert max(M.critical_rows()) == 1

    def test_out_of_grid_rows(self, seq1_matrices):
        M, _ = seq1_matrices
        assert M.at(-1, 0) == 0
        assert M.at(13, 0) == 1

    def test_second_grid(self, example_signal, example_blur, example_grids, example_gammas):
        M, MD = build_matrices(example_signal, example_blur, example_grids[1], example_gammas[1])

        assert M.apply(difference_vector(example_signal)) == tuple(example_gammas[1])
        assert M.at(3, 1) == Fraction(461, 512)
        assert M.at(10, 4) == Fraction(234, 256)
        assert all(n <= 1 for n in MD.nonzero_per_row())

    def test_tiny_sigma_matches_no_blur_matrix(self, example_signal, example_grids):
        grid = example_grids[0]
        blur = BlurModel.gaussian(tiny_sigma(example_signal, grid))
        gamma = sample_sequence(example_signal, blur, grid)

        M = measurement_matrix(example_signal, blur, grid, gamma)

        assert M.regime is BlurRegime.NEGLIGIBLE
        assert M.entries == no_blur_measurement_matrix(region_counts(example_signal, grid)).entries

    def test_large_sigma_is_saturated(self, example_signal, example_grids):
        grid = example_grids[0]
        blur = BlurModel.gaussian(large_sigma(example_signal, grid))
        gamma = sample_sequence(example_signal, blur, grid)

        M = measurement_matrix(example_signal, blur, grid, gamma)
        MD = difference_matrix(M)

        assert classify_regime(example_signal, blur, grid) is BlurRegime.SATURATED
        assert all(x == Fraction(1, 2) for row in M.entries for x in row)
        assert all(x == Fraction(1, 2) for x in MD.entries[0])
        assert all(x == 0 for row in MD.entries[1:] for x in row)

    def test_wide_blur_is_rejected(self, example_signal, example_grids):
        grid = example_grids[0]
        gamma = QuantizedSequence.from_numerators([0] * 13)
        with pytest.raises(RegimeError, match="exceeds the bound"):
            measurement_matrix(example_signal, BlurModel.gaussian(0.2), grid, gamma)

    def test_close_discontinuities_are_rejected(self):
        signal = PiecewiseConstantSignal.from_numerators([256, -256], [0.0, 1.95, 4.5])
        blur = BlurModel.gaussian(0.125)
        grid = SamplingGrid(-0.02, 6)
        gamma = sample_sequence(signal, blur, grid)

        with pytest.raises(RegimeError, match="does not exceed 2T"):
            measurement_matrix(signal, blur, grid, gamma)

    def test_exact_half_critical_value(self):
        """A sample just after D_0 quantizes to 1/2 and reads as an F-form column."""
        signal = PiecewiseConstantSignal.from_numerators([256], [0.0, 3.5])
        blur = BlurModel.gaussian(0.1)
        grid = SamplingGrid(-0.9999, 7)
        gamma = sample_sequence(signal, blur, grid)

        M = measurement_matrix(signal, blur, grid, gamma)

        assert gamma.numerators() == (0, 128, 256, 256, 0, 0, 0)
        assert M.column(0) == (0, Fraction(1, 2), 1, 1, 1, 1, 1)
        assert M.column_forms == (ColumnForm.F_FORM, ColumnForm.PURE)
        assert M.iota == (1, 4)
        assert M.apply(difference_vector(signal)) == tuple(gamma)

    def test_gamma_length_must_match(self, example_signal, example_blur, example_grids):
        with pytest.raises(ValueError):
            measurement_matrix(
                example_signal, example_blur, example_grids[0], QuantizedSequence.from_numerators([0] * 12)
            )

    @pytest.mark.parametrize(
        "column,iota,form",
        [
            ((0, 0, 1, 1), 2, ColumnForm.PURE),
            ((0, Fraction(3, 4), 1, 1), 1, ColumnForm.F_FORM),
            ((0, Fraction(1, 4), 1, 1), 2, ColumnForm.S_FORM),
            ((0, Fraction(1, 2), 1, 1), 1, ColumnForm.F_FORM),
            ((0, Fraction(1, 2), 1, 1), 2, ColumnForm.S_FORM),
        ],
    )
    def test_column_forms(self, column, iota, form):
        assert column_form(tuple(Fraction(c) for c in column), iota) is form

    @pytest.mark.parametrize(
        "column,iota",
        [
            ((0, Fraction(1, 4), 1, 1), 1),
            ((0, Fraction(1, 4), Fraction(1, 2), 1), 2),
            ((1, 0, 1, 1), 2),
        ],
    )
    def test_inadmissible_columns(self, column, iota):
        with pytest.raises(RegimeError):
            column_form(tuple(Fraction(c) for c in column), iota)


class TestDifferenceMatrix:
    """Difference matrix and product classification."""

    def test_no_blur_difference_matrix(self, example_signal, example_grids):
        counts = region_counts(example_signal, example_grids[0])
        MD = difference_matrix(no_blur_measurement_matrix(counts))

        for j, i in enumerate(counts.iota):
            assert MD.column(j) == tuple(Fraction(1) if r == i else Fraction(0) for r in range(13))

    def test_split_column(self, seq1_matrices):
        _, MD = seq1_matrices

        assert MD.at(1, 0) == Fraction(144, 256)
        assert MD.at(2, 0) == Fraction(112, 256)
        assert MD.at(20, 0) == 0

    def test_product_matches_noiseless_differences(self, example_signal, seq1_matrices, example_grids):
        _, MD = seq1_matrices
        counts = region_counts(example_signal, example_grids[0])

        product = classify_product(MD, difference_vector(example_signal), counts, example_signal.discontinuities)

        assert product.matches_direct
        assert product.values == tuple(Fraction(n, 256) for n in D1_AT_ZERO_NOISE)
        assert not product.sparsity_violations
        labels = product.labels()
        assert labels[4] is ProductLabel.FULL
        assert (labels[1], labels[2]) == (ProductLabel.MAJOR, ProductLabel.MINOR)
        assert labels[0] is ProductLabel.ZERO
        assert product.entries[4].value == -2

    def test_no_blur_product(self, example_signal, example_grids):
        counts = region_counts(example_signal, example_grids[1])
        MD = difference_matrix(no_blur_measurement_matrix(counts))
        g_d = difference_vector(example_signal)

        product = classify_product(MD, g_d, counts)

        for i, value in enumerate(product.values):
            expected = g_d[counts.iota.index(i)] if i in counts.iota else 0
            assert value == expected
        assert all(label in (ProductLabel.FULL, ProductLabel.ZERO) for label in product.labels())


if __name__ == "__main__":
    pytest.main(["-v", __file__])
