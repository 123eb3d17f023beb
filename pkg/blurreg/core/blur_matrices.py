"""
Deformation, measurement and difference matrices.

The deformation matrix holds the real Φ values, the measurement matrix is its
round-off corrupted exact counterpart with γ = M g_D, and the difference
matrix takes first differences down each column. The helpers here also
classify which blur regime a scenario is in and check the column, row and
product structure that regime guarantees.
"""
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from .errors import RegimeError
from .normal import CdfFunction, norm_cdf, norm_isf
from .rationals import QUANT, to_fraction
from .signal_model import (
    BlurModel,
    PiecewiseConstantSignal,
    QuantizedSequence,
    RegionCounts,
    SamplingGrid,
    difference_vector,
    region_counts,
)

HALF = Fraction(1, 2)
ONE = Fraction(1)
ZERO = Fraction(0)

Matrix = Tuple[Tuple[Fraction, ...], ...]


class BlurRegime(str, Enum):
    """Where a scenario sits relative to round-off."""

    NEGLIGIBLE = "negligible"  # every column pure 0/1
    DISCERNIBLE = "discernible"  # sigma below 0.5T / max nu
    SATURATED = "saturated"  # every entry reads 1/2, gamma all zero
    UNSUPPORTED = "unsupported"


class ColumnForm(str, Enum):
    """Shape of one measurement-matrix column."""

    PURE = "pure"
    F_FORM = "F-form"
    S_FORM = "S-form"
    HALF = "half"


class ProductLabel(str, Enum):
    """Role of one entry of M_D g_D."""

    ZERO = "zero"
    FULL = "full"
    MAJOR = "major"
    MINOR = "minor"


def nu_threshold(delta_magnitude: Union[Fraction, int, float, str]) -> float:
    """ν with Φ(ν) = 1 - 1/(512 |Δ|).

    Raises:
        ValueError: if ``delta_magnitude`` is not positive.
    """
    magnitude = to_fraction(delta_magnitude)
    if not magnitude > 0:
        raise ValueError(f"step magnitude must be positive, got {delta_magnitude}")
    return norm_isf(1.0 / (2 * QUANT * float(magnitude)))


def _snap_threshold(delta: Fraction) -> float:
    """Φ values within this distance of 0 or 1 quantize away for step delta."""
    return 1.0 / (2 * QUANT * float(abs(delta)))


@dataclass(frozen=True)
class BlurBoundResult:
    """Outcome of the blur bound check σ_k < 0.5T / max_j ν_j."""

    holds: bool
    margin: float
    bound: float
    max_nu: float

    def __bool__(self) -> bool:
        return self.holds


def blur_bound_check(
    signal: PiecewiseConstantSignal, blur: BlurModel, grid: Optional[SamplingGrid] = None
) -> BlurBoundResult:
    """Check that every blur component satisfies σ_k < 0.5T / max_j ν_j."""
    steps = difference_vector(signal)
    max_nu = max(nu_threshold(abs(s)) for s in steps)
    bound = 0.5 / max_nu
    margin = bound - blur.max_sigma
    return BlurBoundResult(holds=margin > 0, margin=margin, bound=bound, max_nu=max_nu)


@dataclass(frozen=True)
class DeformationMatrix:
    """Real N x (m+1) matrix of Φ((t_0 + iT - D_j)/σ), mixture-weighted."""

    entries: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    def apply(self, g_d: Sequence[Fraction]) -> np.ndarray:
        return self.entries @ np.array([float(g) for g in g_d])


def deformation_matrix(
    signal: PiecewiseConstantSignal,
    blur: BlurModel,
    grid: SamplingGrid,
    cdf: CdfFunction = norm_cdf,
) -> DeformationMatrix:
    times = np.array(grid.times())
    ds = np.array(signal.discontinuities)
    displacement = times[:, None] - ds[None, :]
    entries = np.zeros_like(displacement)
    for weight, sigma in blur.components:
        entries += float(weight) * np.vectorize(cdf, otypes=[float])(displacement / sigma)
    return DeformationMatrix(entries)


@dataclass(frozen=True)
class MeasurementMatrix:
    """Exact N x (m+1) measurement matrix with its per-column forms."""

    entries: Matrix
    column_forms: Tuple[ColumnForm, ...]
    regime: BlurRegime
    iota: Tuple[int, ...] = ()

    @property
    def n_rows(self) -> int:
        return len(self.entries)

    @property
    def n_cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def column(self, j: int) -> Tuple[Fraction, ...]:
        return tuple(row[j] for row in self.entries)

    def at(self, i: int, j: int) -> Fraction:
        """Entry (i, j); rows above the grid read 0 and rows below read 1."""
        if i < 0:
            return ZERO
        if i >= self.n_rows:
            return ONE
        return self.entries[i][j]

    def critical_rows(self) -> Tuple[int, ...]:
        """Number of critical values (entries strictly inside (0, 1)) per row."""
        return tuple(sum(1 for x in row if 0 < x < 1) for row in self.entries)

    def apply(self, g_d: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        return tuple(sum((x * g for x, g in zip(row, g_d)), ZERO) for row in self.entries)


@dataclass(frozen=True)
class DifferenceMatrix:
    """Row 0 of M followed by the successive row differences of M."""

    entries: Matrix

    @property
    def n_rows(self) -> int:
        return len(self.entries)

    @property
    def n_cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def at(self, i: int, j: int) -> Fraction:
        """Entry (i, j); rows outside the grid read 0."""
        if 0 <= i < self.n_rows and 0 <= j < self.n_cols:
            return self.entries[i][j]
        return ZERO

    def column(self, j: int) -> Tuple[Fraction, ...]:
        return tuple(row[j] for row in self.entries)

    def nonzero_per_row(self) -> Tuple[int, ...]:
        return tuple(sum(1 for x in row if x != 0) for row in self.entries)

    def apply(self, g_d: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        return tuple(sum((x * g for x, g in zip(row, g_d)), ZERO) for row in self.entries)


@dataclass(frozen=True)
class ProductEntry:
    """One index of M_D g_D with its role."""

    index: int
    value: Fraction
    label: ProductLabel
    column: Optional[int] = None
    case: str = "zero"


@dataclass(frozen=True)
class ProductClassification:
    """Classified entries of M_D g_D plus any sparsity violations."""

    entries: Tuple[ProductEntry, ...]
    direct: Tuple[Fraction, ...]
    sparsity_violations: Tuple[str, ...] = ()

    @property
    def values(self) -> Tuple[Fraction, ...]:
        return tuple(e.value for e in self.entries)

    @property
    def matches_direct(self) -> bool:
        return self.values == self.direct

    def labels(self) -> Tuple[ProductLabel, ...]:
        return tuple(e.label for e in self.entries)


def classify_regime(
    signal: PiecewiseConstantSignal,
    blur: BlurModel,
    grid: SamplingGrid,
    cdf: CdfFunction = norm_cdf,
) -> BlurRegime:
    """Place a scenario in one of the blur regimes."""
    tilde = deformation_matrix(signal, blur, grid, cdf).entries
    steps = difference_vector(signal)
    band = 1.0 / (2 * QUANT * (signal.m + 1) * float(max(abs(s) for s in steps)))
    if np.all(np.abs(tilde - 0.5) < band):
        return BlurRegime.SATURATED
    pure = True
    for j, delta in enumerate(steps):
        eps = _snap_threshold(delta)
        column = tilde[:, j]
        if np.any((column >= eps) & (column <= 1.0 - eps)):
            pure = False
            break
    if pure:
        return BlurRegime.NEGLIGIBLE
    if blur_bound_check(signal, blur, grid):
        return BlurRegime.DISCERNIBLE
    return BlurRegime.UNSUPPORTED


def column_form(column: Sequence[Fraction], iota_j: int) -> ColumnForm:
    """Match a measurement column against the three admissible shapes.

    A critical value of exactly 1/2 sits on the boundary between the F and
    S forms: at ι(j) it is read as the F-form, one row earlier as the S-form.

    Raises:
        RegimeError: if the column has none of the shapes.
    """
    n = len(column)

    def is_step(first_one: int) -> bool:
        return all(column[i] == 0 for i in range(min(first_one, n))) and all(
            column[i] == 1 for i in range(max(first_one, 0), n)
        )

    critical = [i for i, x in enumerate(column) if 0 < x < 1]
    if not critical:
        if is_step(iota_j):
            return ColumnForm.PURE
    elif len(critical) == 1:
        i = critical[0]
        x = column[i]
        rest = list(column)
        rest[i] = ZERO if i < iota_j else ONE
        if i == iota_j and HALF <= x < 1 and all(
            rest[k] == (0 if k < iota_j else 1) for k in range(n)
        ):
            return ColumnForm.F_FORM
        if i == iota_j - 1 and 0 < x <= HALF and all(
            rest[k] == (0 if k < iota_j else 1) for k in range(n)
        ):
            return ColumnForm.S_FORM
    raise RegimeError(
        f"column with first saturated row {iota_j} matches no admissible form: "
        f"{[str(x) for x in column]}"
    )


def measurement_matrix(
    signal: PiecewiseConstantSignal,
    blur: BlurModel,
    grid: SamplingGrid,
    gamma: QuantizedSequence,
    cdf: CdfFunction = norm_cdf,
) -> MeasurementMatrix:
    """Exact measurement matrix with γ = M g_D.

    Entries whose Φ value lies within 1/(512|Δ_j|) of 0 or 1 snap to 0 or 1;
    the single remaining entry of a column (its critical value) is solved
    exactly from γ.

    Raises:
        RegimeError: when the blur bound fails, discontinuities are not more
            than 2T apart while critical values exist, or γ is inconsistent
            with the snapped matrix.
    """
    if len(gamma) != grid.N:
        raise ValueError(f"gamma has {len(gamma)} samples, grid has {grid.N}")
    steps = difference_vector(signal)
    n_cols = len(steps)
    regime = classify_regime(signal, blur, grid, cdf)
    logger.debug("measurement matrix: regime={}", regime.value)

    if regime is BlurRegime.SATURATED:
        if any(g != 0 for g in gamma):
            raise RegimeError("saturated blur must produce an all-zero gamma")
        entries = tuple(tuple(HALF for _ in range(n_cols)) for _ in range(grid.N))
        return MeasurementMatrix(entries, tuple(ColumnForm.HALF for _ in range(n_cols)), regime)
    if regime is BlurRegime.UNSUPPORTED:
        check = blur_bound_check(signal, blur, grid)
        raise RegimeError(
            f"blur sigma={blur.max_sigma:g} exceeds the bound {check.bound:.6g} "
            f"(max nu={check.max_nu:.6g}); the measurement matrix is not defined here"
        )

    counts = region_counts(signal, grid)
    tilde = deformation_matrix(signal, blur, grid, cdf).entries
    rows: List[List[Optional[Fraction]]] = [[None] * n_cols for _ in range(grid.N)]
    critical_in_column: Dict[int, int] = {}
    for j, delta in enumerate(steps):
        eps = _snap_threshold(delta)
        for i in range(grid.N):
            value = tilde[i, j]
            if value < eps:
                rows[i][j] = ZERO
            elif value > 1.0 - eps:
                rows[i][j] = ONE
            elif j in critical_in_column:
                raise RegimeError(f"column {j} has more than one critical value")
            else:
                critical_in_column[j] = i

    if critical_in_column and not signal.min_spacing > 2.0:
        raise RegimeError(
            f"minimum discontinuity spacing {signal.min_spacing:g}T does not exceed 2T"
        )

    by_row: Dict[int, int] = {}
    for j, i in critical_in_column.items():
        if i in by_row:
            raise RegimeError(f"row {i} holds critical values for columns {by_row[i]} and {j}")
        by_row[i] = j

    for i in range(grid.N):
        known = sum((rows[i][k] * steps[k] for k in range(n_cols) if rows[i][k] is not None), ZERO)
        if i in by_row:
            j = by_row[i]
            value = (gamma[i] - known) / steps[j]
            if not 0 < value < 1:
                raise RegimeError(
                    f"critical value at ({i}, {j}) solves to {value}, outside (0, 1)"
                )
            rows[i][j] = value
        elif known != gamma[i]:
            raise RegimeError(
                f"row {i}: snapped matrix gives {known} but gamma reads {gamma[i]}"
            )

    entries = tuple(tuple(row) for row in rows)
    forms = tuple(
        column_form(tuple(r[j] for r in entries), counts.iota[j]) for j in range(n_cols)
    )
    if regime is BlurRegime.DISCERNIBLE and not critical_in_column:
        regime = BlurRegime.NEGLIGIBLE
    return MeasurementMatrix(entries, forms, regime, counts.iota)


def no_blur_measurement_matrix(counts: RegionCounts) -> MeasurementMatrix:
    """Block 0/1 matrix: row i has ones in the columns j with ι(j) <= i."""
    n_cols = len(counts.iota)
    entries = tuple(
        tuple(ONE if counts.iota[j] <= i else ZERO for j in range(n_cols))
        for i in range(counts.N)
    )
    return MeasurementMatrix(
        entries, tuple(ColumnForm.PURE for _ in range(n_cols)), BlurRegime.NEGLIGIBLE, counts.iota
    )


def difference_matrix(M: MeasurementMatrix) -> DifferenceMatrix:
    rows = []
    previous = tuple(ZERO for _ in range(M.n_cols))
    for row in M.entries:
        rows.append(tuple(a - b for a, b in zip(row, previous)))
        previous = row
    return DifferenceMatrix(tuple(rows))


def classify_product(
    M_D: DifferenceMatrix,
    g_d: Sequence[Fraction],
    counts: RegionCounts,
    discontinuities: Optional[Sequence[float]] = None,
) -> ProductClassification:
    """Label every entry of M_D g_D and evaluate the sparsity statements.

    Each nonzero entry belongs to exactly one column j. An entry at ι(j) is
    the full step when M_D[ι(j), j] = 1 and the major share of a split step
    otherwise; an entry at ι(j) - 1 or ι(j) + 1 is the minor share.

    Args:
        M_D: Difference matrix.
        g_d: Difference vector of the signal.
        counts: Region counts of the grid that produced M_D.
        discontinuities: D_0..D_m; enables the spacing statements.

    Raises:
        RegimeError: if an entry cannot be attributed to a single column.
    """
    g_d = tuple(to_fraction(g) for g in g_d)
    direct = M_D.apply(g_d)
    n, iota = M_D.n_rows, counts.iota

    def cumulative(i: int, j: int) -> Fraction:
        return sum((M_D.at(r, j) for r in range(0, i + 1)), ZERO)

    entries = []
    for i in range(n):
        cols = [j for j in range(M_D.n_cols) if M_D.at(i, j) != 0]
        if not cols:
            entries.append(ProductEntry(i, ZERO, ProductLabel.ZERO))
            continue
        if len(cols) > 1:
            raise RegimeError(f"row {i} of M_D has nonzero entries in columns {cols}")
        j = cols[0]
        delta = g_d[j]
        if i == iota[j] and M_D.at(i, j) == 1:
            label, case = ProductLabel.FULL, "leading"
            value = cumulative(i, j) * delta
        elif i == iota[j]:
            label = ProductLabel.MAJOR
            if cumulative(i - 1, j) == 0:
                case, value = "leading", cumulative(i, j) * delta
            else:
                case, value = "trailing", (1 - cumulative(i - 1, j)) * delta
        elif i == iota[j] - 1:
            label, case = ProductLabel.MINOR, "leading"
            value = cumulative(i, j) * delta
        elif i == iota[j] + 1:
            label, case = ProductLabel.MINOR, "trailing"
            value = (1 - cumulative(i - 1, j)) * delta
        else:
            raise RegimeError(
                f"row {i} carries column {j} but sits {i - iota[j]} rows from iota({j})={iota[j]}"
            )
        entries.append(ProductEntry(i, value, label, j, case))

    violations = _sparsity_violations(M_D, direct, iota, discontinuities)
    return ProductClassification(tuple(entries), direct, tuple(violations))


def _sparsity_violations(
    M_D: DifferenceMatrix,
    product: Sequence[Fraction],
    iota: Sequence[int],
    discontinuities: Optional[Sequence[float]],
) -> List[str]:
    n = len(product)

    def p(i: int) -> Fraction:
        return product[i] if 0 <= i < n else ZERO

    def m_at(i: int, j: int) -> Fraction:
        return sum((M_D.at(r, j) for r in range(0, min(i, n - 1) + 1)), ZERO) if i >= 0 else ZERO

    found = []
    m = len(iota) - 1
    for j, i in enumerate(iota):
        if M_D.at(i, j) != 1:
            continue
        before, after = p(i - 1) != 0, p(i + 1) != 0
        if before and after:
            found.append(f"column {j}: both neighbours of full step at {i} are nonzero")
        if before:
            if discontinuities is not None and j >= 1 and not discontinuities[j] - discontinuities[j - 1] < 2.5:
                found.append(f"column {j}: nonzero entry before full step but D_{j} - D_{j - 1} >= 2.5T")
            if not abs(p(i - 2) + p(i - 1)) > abs(p(i)):
                found.append(f"column {j}: preceding pair at {i - 2},{i - 1} is not larger than the full step")
        if after:
            if discontinuities is not None and j < m and not discontinuities[j + 1] - discontinuities[j] < 2.5:
                found.append(f"column {j}: nonzero entry after full step but D_{j + 1} - D_{j} >= 2.5T")
            if not abs(p(i + 1) + p(i + 2)) > abs(p(i)):
                found.append(f"column {j}: following pair at {i + 1},{i + 2} is not larger than the full step")

    if discontinuities is not None:
        for j in range(m):
            i = iota[j]
            if iota[j + 1] != i + 2:
                continue
            both_s = m_at(i - 1, j) > 0 and m_at(i + 1, j + 1) > 0
            both_f = m_at(i, j) < 1 and m_at(i + 2, j + 1) < 1
            if (both_s or both_f) and not discontinuities[j + 1] - discontinuities[j] < 2.5:
                found.append(f"columns {j},{j + 1}: adjacent split steps but D_{j + 1} - D_{j} >= 2.5T")
    return found


def build_matrices(
    signal: PiecewiseConstantSignal,
    blur: BlurModel,
    grid: SamplingGrid,
    gamma: QuantizedSequence,
    cdf: CdfFunction = norm_cdf,
) -> Tuple[MeasurementMatrix, DifferenceMatrix]:
    """Measurement and difference matrices in one call."""
    M = measurement_matrix(signal, blur, grid, gamma, cdf)
    return M, difference_matrix(M)
