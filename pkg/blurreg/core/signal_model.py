"""
Signal model: piecewise-constant signals, Gaussian (mixture) blur, sampling
grids and exact quantized sample sequences.

All lengths are in units of the sampling interval T. Amplitudes and samples
are exact multiples of 1/256 held as ``fractions.Fraction``; only the blurred
values before quantization are floats.
"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from loguru import logger

from ..config import get_settings
from .errors import GridValidationError, SignalValidationError
from .normal import CdfFunction, norm_cdf, norm_isf
from .rationals import QUANT, from_numerators, on_grid, round_half_even, to_fraction

# Two sample/discontinuity positions closer than this are treated as equal.
POSITION_TOL = 1e-12


@dataclass(frozen=True)
class PiecewiseConstantSignal:
    """g(t) = g_j on D_{j-1} <= t < D_j, zero outside [D_0, D_m).

    Attributes:
        amplitudes: g_1..g_m, exact multiples of 1/256.
        discontinuities: D_0 = 0 < D_1 < ... < D_m, in units of T.
    """

    amplitudes: Tuple[Fraction, ...]
    discontinuities: Tuple[float, ...]

    def __post_init__(self):
        amplitudes = tuple(to_fraction(a) for a in self.amplitudes)
        discontinuities = tuple(float(d) for d in self.discontinuities)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "discontinuities", discontinuities)

        m = len(amplitudes)
        if m == 0:
            raise SignalValidationError("a signal needs at least one region")
        if len(discontinuities) != m + 1:
            raise SignalValidationError(
                f"expected {m + 1} discontinuities for {m} amplitudes, "
                f"got {len(discontinuities)}"
            )
        if discontinuities[0] != 0.0:
            raise SignalValidationError(f"D_0 must be 0, got {discontinuities[0]}")
        for j in range(m):
            if not discontinuities[j + 1] > discontinuities[j]:
                raise SignalValidationError(
                    f"discontinuities must increase strictly: D_{j}={discontinuities[j]}, "
                    f"D_{j + 1}={discontinuities[j + 1]}"
                )
        bound = get_settings().AMPLITUDE_BOUND
        for j, g in enumerate(amplitudes, start=1):
            if not on_grid(g):
                raise SignalValidationError(f"g_{j}={g} is not a multiple of 1/{QUANT}")
            if abs(g) > bound:
                raise SignalValidationError(f"|g_{j}|={abs(g)} exceeds the amplitude bound {bound}")
        if amplitudes[0] == 0 or amplitudes[-1] == 0:
            raise SignalValidationError("the first and last amplitudes must be nonzero")
        for j in range(m - 1):
            if amplitudes[j] == amplitudes[j + 1]:
                raise SignalValidationError(
                    f"neighbouring amplitudes must differ: g_{j + 1} = g_{j + 2} = {amplitudes[j]}"
                )

    @classmethod
    def from_numerators(
        cls, numerators: Iterable[int], discontinuities: Iterable[float]
    ) -> "PiecewiseConstantSignal":
        """Build a signal from amplitude numerators over 256."""
        return cls(from_numerators(numerators), tuple(discontinuities))

    @property
    def m(self) -> int:
        """Number of nonzero regions in the support."""
        return len(self.amplitudes)

    @property
    def levels(self) -> Tuple[Fraction, ...]:
        """(g_0, g_1, ..., g_m, g_{m+1}) with the implicit zero ends."""
        return (Fraction(0),) + self.amplitudes + (Fraction(0),)

    @property
    def min_spacing(self) -> float:
        d = self.discontinuities
        return min((d[j + 1] - d[j] for j in range(self.m)), default=math.inf)

    def __str__(self) -> str:
        parts = ", ".join(
            f"{g}@[{a:g},{b:g})"
            for g, a, b in zip(self.amplitudes, self.discontinuities, self.discontinuities[1:])
        )
        return f"PiecewiseConstantSignal({parts})"


@dataclass(frozen=True)
class BlurModel:
    """A Gaussian blur or a weighted mixture of Gaussian blurs.

    Attributes:
        components: (weight, sigma) pairs; weights are exact and sum to 1,
            sigmas are in units of T.
    """

    components: Tuple[Tuple[Fraction, float], ...]

    def __post_init__(self):
        components = tuple((to_fraction(w), float(s)) for w, s in self.components)
        object.__setattr__(self, "components", components)
        if not components:
            raise SignalValidationError("a blur model needs at least one component")
        for w, s in components:
            if w <= 0:
                raise SignalValidationError(f"mixture weights must be positive, got {w}")
            if not s > 0 or not math.isfinite(s):
                raise SignalValidationError(f"sigma must be positive and finite, got {s}")
        total = sum(w for w, _ in components)
        if total != 1:
            raise SignalValidationError(f"mixture weights sum to {total}, not 1")

    @classmethod
    def gaussian(cls, sigma: float) -> "BlurModel":
        return cls(((Fraction(1), sigma),))

    @classmethod
    def mixture(cls, components: Iterable[Tuple[Union[Fraction, str, int], float]]) -> "BlurModel":
        return cls(tuple(components))

    @property
    def is_pure(self) -> bool:
        return len(self.components) == 1

    @property
    def sigma(self) -> float:
        """The sigma of a pure blur."""
        if not self.is_pure:
            raise ValueError("sigma is only defined for a pure Gaussian blur")
        return self.components[0][1]

    @property
    def max_sigma(self) -> float:
        return max(s for _, s in self.components)

    def cdf(self, z: float, cdf: CdfFunction = norm_cdf) -> float:
        """Mixture CDF of a displacement ``z`` (units of T)."""
        return sum(float(w) * cdf(z / s) for w, s in self.components)


@dataclass(frozen=True)
class SamplingGrid:
    """Samples at t_0 + iT, i = 0..N-1.

    ``t0`` and every position the library works with are in units of T;
    ``T`` is the physical sampling interval and only enters through
    ``physical_times``.
    """

    t0: float
    N: int
    T: float = 1.0

    def __post_init__(self):
        if not self.T > 0:
            raise GridValidationError(f"sampling interval must be positive, got {self.T}")
        if self.N < 2:
            raise GridValidationError(f"a grid needs at least two samples, got N={self.N}")
        if not self.t0 < 0:
            raise GridValidationError(f"t0 must be negative, got {self.t0}")

    def time(self, i: int) -> float:
        """Position of sample i in units of T."""
        return self.t0 + i

    def times(self) -> List[float]:
        return [self.time(i) for i in range(self.N)]

    def physical_times(self) -> List[float]:
        """Sample instants (t_0 + i)T in the units T is given in."""
        return [t * self.T for t in self.times()]

    def validate_against(self, signal: PiecewiseConstantSignal) -> None:
        """Check the grid invariants that depend on the signal.

        Raises:
            GridValidationError: when the grid ends before D_m, a sample
                falls on a discontinuity, or two discontinuities sit an
                integer number of samples apart.
        """
        last = self.time(self.N - 1)
        d_m = signal.discontinuities[-1]
        if not last > d_m:
            raise GridValidationError(
                f"grid ends at {last:g} which does not pass D_m={d_m:g}; increase N"
            )
        for i, t in enumerate(self.times()):
            for j, d in enumerate(signal.discontinuities):
                if abs(t - d) <= POSITION_TOL:
                    raise GridValidationError(f"sample {i} at t={t:g} coincides with D_{j}")
        ds = signal.discontinuities
        for j in range(len(ds)):
            for k in range(j + 1, len(ds)):
                gap = ds[k] - ds[j]
                if abs(gap - round(gap)) <= POSITION_TOL:
                    raise GridValidationError(
                        f"D_{k} - D_{j} = {gap:g} is an integer multiple of T"
                    )


@dataclass(frozen=True)
class QuantizedSequence:
    """N exact samples, each a multiple of 1/256."""

    values: Tuple[Fraction, ...]

    def __post_init__(self):
        values = tuple(to_fraction(v) for v in self.values)
        for i, v in enumerate(values):
            if not on_grid(v):
                raise ValueError(f"entry {i} = {v} is not a multiple of 1/{QUANT}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_numerators(cls, numerators: Iterable[int]) -> "QuantizedSequence":
        return cls(from_numerators(numerators))

    def numerators(self) -> Tuple[int, ...]:
        return tuple((v * QUANT).numerator for v in self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.values)


@dataclass(frozen=True)
class RegionCounts:
    """Samples per region and the index of the first sample after each D_j.

    ``eta`` holds η_0..η_{m+1}; ``iota[j]`` is ι(j) = Σ_{k<=j} η_k.
    """

    eta: Tuple[int, ...]
    iota: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        eta = tuple(int(e) for e in self.eta)
        object.__setattr__(self, "eta", eta)
        running, iota = 0, []
        for e in eta[:-1]:
            running += e
            iota.append(running)
        object.__setattr__(self, "iota", tuple(iota))

    @property
    def N(self) -> int:
        return sum(self.eta)


def eval_signal(signal: PiecewiseConstantSignal, t: float) -> Fraction:
    """g(t): g_j on D_{j-1} <= t < D_j, else 0."""
    d = signal.discontinuities
    for j, g in enumerate(signal.amplitudes, start=1):
        if d[j - 1] <= t < d[j]:
            return g
    return Fraction(0)


def difference_vector(signal: PiecewiseConstantSignal) -> Tuple[Fraction, ...]:
    """g_D = (g_1 - g_0, ..., g_{m+1} - g_m)."""
    levels = signal.levels
    return tuple(levels[j + 1] - levels[j] for j in range(signal.m + 1))


def eval_blurred(
    signal: PiecewiseConstantSignal, blur: BlurModel, t: float, cdf: CdfFunction = norm_cdf
) -> float:
    """g̃(t) = Σ_j (g_{j+1} - g_j) Φ((t - D_j)/σ), mixture-weighted."""
    steps = difference_vector(signal)
    total = 0.0
    for weight, sigma in blur.components:
        pure = 0.0
        for delta, d in zip(steps, signal.discontinuities):
            pure += float(delta) * cdf((t - d) / sigma)
        total += float(weight) * pure
    return total


def quantize(value: Union[float, Fraction, int]) -> Fraction:
    """Nearest multiple of 1/256, exact ties rounded half to even."""
    if isinstance(value, float) and not math.isfinite(value):
        raise ValueError(f"cannot quantize {value}")
    return Fraction(round_half_even(to_fraction(value) * QUANT), QUANT)


def sample_sequence(
    signal: PiecewiseConstantSignal,
    blur: BlurModel,
    grid: SamplingGrid,
    cdf: CdfFunction = norm_cdf,
) -> QuantizedSequence:
    """γ[i] = quantize(g̃(t_0 + iT)) for i = 0..N-1.

    Raises:
        GridValidationError: if the grid violates its invariants for ``signal``.
    """
    grid.validate_against(signal)
    values = tuple(quantize(eval_blurred(signal, blur, t, cdf)) for t in grid.times())
    logger.debug("sampled N={} from t0={} with {} blur component(s)", grid.N, grid.t0, len(blur.components))
    return QuantizedSequence(values)


def region_counts(signal: PiecewiseConstantSignal, grid: SamplingGrid) -> RegionCounts:
    """Count samples before D_0, inside each region, and after D_m.

    Raises:
        GridValidationError: if a sample sits exactly on a discontinuity.
    """
    d = signal.discontinuities
    eta = [0] * (signal.m + 2)
    for i, t in enumerate(grid.times()):
        for j, dj in enumerate(d):
            if abs(t - dj) <= POSITION_TOL:
                raise GridValidationError(f"sample {i} at t={t:g} coincides with D_{j}")
        region = sum(1 for dj in d if t > dj)
        eta[region] += 1
    return RegionCounts(tuple(eta))


def prefix_levels(signal: PiecewiseConstantSignal) -> Tuple[Fraction, ...]:
    """Plateau level just before each discontinuity: (g_0, ..., g_m)."""
    return signal.levels[: signal.m + 1]


def large_sigma(signal: PiecewiseConstantSignal, grid: SamplingGrid) -> float:
    """A sigma so large that every Φ argument sits inside the all-zero band.

    Every |Φ((t_0+iT-D_j)/σ) - 0.5| stays below 1/(512 (m+1) max|Δ|), which
    makes γ all-zero and the measurement matrix all-1/2.
    """
    steps = difference_vector(signal)
    band = 1.0 / (2 * QUANT * (signal.m + 1) * float(max(abs(s) for s in steps)))
    reach = max(abs(t - d) for t in grid.times() for d in signal.discontinuities)
    # |Φ(z) - 1/2| <= |z| / sqrt(2π); keep a factor 2 of room
    return 2.0 * reach / (math.sqrt(2.0 * math.pi) * band)


def tiny_sigma(signal: PiecewiseConstantSignal, grid: SamplingGrid) -> float:
    """A sigma below which every sample is saturated for every column."""
    steps = difference_vector(signal)
    nu = max(norm_isf(1.0 / (2 * QUANT * float(abs(s)))) for s in steps)
    gap = min(abs(t - d) for t in grid.times() for d in signal.discontinuities)
    return 0.5 * gap / nu


def worked_example_signal() -> PiecewiseConstantSignal:
    """The four-region test signal used throughout the reproduction."""
    return PiecewiseConstantSignal.from_numerators(
        (256, -256, 256, -256), (0.0, 2.44, 5.01, 7.42, 9.43)
    )
