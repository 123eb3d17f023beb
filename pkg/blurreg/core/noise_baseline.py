"""
Noise model, difference sequences and the cross-correlation baseline.

Noise adds ±x to every sample with x a multiple of 1/256, so noisy
sequences stay exact. Cross-correlation is computed on integer numerators
with numpy and converted back to exact rationals over 256².
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from .rationals import QUANT, on_grid, to_fraction, to_numerators
from .signal_model import QuantizedSequence

Correlation = Dict[int, Fraction]
SequenceLike = Union[QuantizedSequence, Sequence[Fraction]]


@dataclass(frozen=True)
class NoiseSpec:
    """Noise of fixed magnitude x with a sign per sample.

    Either ``signs`` (an explicit ±1 pattern) or ``seed`` (equiprobable
    signs drawn with numpy's default generator) supplies the signs.
    """

    x: Fraction
    signs: Optional[Tuple[int, ...]] = None
    seed: Optional[int] = None

    def __post_init__(self):
        x = to_fraction(self.x)
        object.__setattr__(self, "x", x)
        if not 0 <= x <= Fraction(1, 2):
            raise ValueError(f"noise magnitude must lie in [0, 1/2], got {x}")
        if not on_grid(x):
            raise ValueError(f"noise magnitude {x} is not a multiple of 1/{QUANT}")
        if self.signs is not None:
            signs = tuple(int(s) for s in self.signs)
            if any(s not in (-1, 1) for s in signs):
                raise ValueError(f"signs must be +1 or -1, got {signs}")
            object.__setattr__(self, "signs", signs)
        elif self.seed is None:
            raise ValueError("a noise spec needs either signs or a seed")

    @classmethod
    def from_pattern(cls, x: Union[Fraction, str, int], pattern: str) -> "NoiseSpec":
        """Build from a pattern such as ``"++--+"``."""
        lookup = {"+": 1, "-": -1}
        try:
            signs = tuple(lookup[c] for c in pattern if not c.isspace() and c != ",")
        except KeyError as e:
            raise ValueError(f"invalid sign character {e} in '{pattern}'") from e
        return cls(to_fraction(x), signs=signs)

    def resolve_signs(self, n: int) -> Tuple[int, ...]:
        if self.signs is not None:
            if len(self.signs) != n:
                raise ValueError(f"sign pattern has {len(self.signs)} entries, sequence has {n}")
            return self.signs
        return random_signs(n, self.seed)


@dataclass(frozen=True)
class DifferenceSequence:
    """d[i] = y[i] - y[i-1] with y[-1] = 0."""

    values: Tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.values)

    def at(self, i: int) -> Fraction:
        """d[i], reading entries outside the sequence as zero."""
        if 0 <= i < len(self.values):
            return self.values[i]
        return Fraction(0)

    def prefix_sums(self) -> Tuple[Fraction, ...]:
        out, running = [], Fraction(0)
        for value in self.values:
            running += value
            out.append(running)
        return tuple(out)


def random_signs(n: int, seed: Optional[int]) -> Tuple[int, ...]:
    """Equiprobable ±1 signs from ``numpy.random.default_rng(seed)``."""
    rng = np.random.default_rng(seed)
    return tuple(int(s) for s in rng.choice(np.array([-1, 1]), size=n))


def apply_noise(gamma: SequenceLike, spec: NoiseSpec) -> QuantizedSequence:
    """y[i] = γ[i] + sign[i]·x."""
    values = tuple(gamma)
    signs = spec.resolve_signs(len(values))
    return QuantizedSequence(tuple(g + s * spec.x for g, s in zip(values, signs)))


def difference_sequence(y: SequenceLike) -> DifferenceSequence:
    values = tuple(to_fraction(v) for v in y)
    previous = [Fraction(0)] + list(values[:-1])
    return DifferenceSequence(tuple(a - b for a, b in zip(values, previous)))


def cross_correlation(y1: SequenceLike, y2: SequenceLike) -> Correlation:
    """r[k] = Σ_i y1[i] y2[i+k] over zero-extended sequences.

    Returns exact values for every lag k in [-(N1-1), N2-1].
    """
    a = np.array(to_numerators(tuple(y1)), dtype=np.int64)
    b = np.array(to_numerators(tuple(y2)), dtype=np.int64)
    if a.size == 0 or b.size == 0:
        return {}
    # np.correlate(b, a, "full")[k + len(a) - 1] = Σ_n b[n + k] a[n]
    full = np.correlate(b, a, mode="full")
    offset = a.size - 1
    return {k - offset: Fraction(int(v), QUANT * QUANT) for k, v in enumerate(full)}


def ccorr_argmax_all(r: Correlation) -> Tuple[int, ...]:
    """Every lag attaining the maximum, in tie-break order."""
    if not r:
        return (0,)
    best = max(r.values())
    return tuple(sorted((k for k, v in r.items() if v == best), key=lambda k: (abs(k), k)))


def ccorr_argmax(r: Correlation) -> int:
    """Lag of the maximum; ties go to the smallest |lag|, negative first."""
    return ccorr_argmax_all(r)[0]


def breakpoint_scan(
    gamma1: SequenceLike,
    gamma2: SequenceLike,
    signs1: Sequence[int],
    signs2: Sequence[int],
    xs: Iterable[Fraction],
) -> List[Tuple[Fraction, int]]:
    """Baseline lag estimate for each noise magnitude in ``xs``."""
    out = []
    for x in xs:
        y1 = apply_noise(gamma1, NoiseSpec(x, signs=tuple(signs1)))
        y2 = apply_noise(gamma2, NoiseSpec(x, signs=tuple(signs2)))
        out.append((to_fraction(x), ccorr_argmax(cross_correlation(y1, y2))))
    logger.debug("argmax scan over {} noise levels", len(out))
    return out


def correlation_polynomials(
    gamma1: SequenceLike,
    gamma2: SequenceLike,
    signs1: Sequence[int],
    signs2: Sequence[int],
) -> Dict[int, Tuple[Fraction, Fraction, Fraction]]:
    """Exact coefficients (c0, c1, c2) of r[k](x) = c0 + c1 x + c2 x² per lag."""
    samples = {}
    for x in (Fraction(0), Fraction(1, 4), Fraction(1, 2)):
        y1 = apply_noise(gamma1, NoiseSpec(x, signs=tuple(signs1)))
        y2 = apply_noise(gamma2, NoiseSpec(x, signs=tuple(signs2)))
        samples[x] = cross_correlation(y1, y2)
    r0, rq, rh = (samples[Fraction(0)], samples[Fraction(1, 4)], samples[Fraction(1, 2)])
    out = {}
    for k in r0:
        c0 = r0[k]
        # r(1/4) = c0 + c1/4 + c2/16 and r(1/2) = c0 + c1/2 + c2/4
        c2 = 8 * (rh[k] - c0) - 16 * (rq[k] - c0)
        c1 = 4 * (rq[k] - c0) - c2 / 4
        out[k] = (c0, c1, c2)
    return out


def crossing_points(
    coefficients: Dict[int, Tuple[Fraction, Fraction, Fraction]],
    lag_a: int,
    lag_b: int,
    lower: Fraction = Fraction(0),
    upper: Fraction = Fraction(1, 2),
) -> List[Union[Fraction, float]]:
    """Noise magnitudes in [lower, upper] where r[lag_a] = r[lag_b].

    Rational crossings come back as Fractions, irrational ones as floats.
    """
    a0, a1, a2 = coefficients[lag_a]
    b0, b1, b2 = coefficients[lag_b]
    c0, c1, c2 = a0 - b0, a1 - b1, a2 - b2
    roots: List[Union[Fraction, float]] = []
    if c2 == 0:
        if c1 != 0:
            roots.append(-c0 / c1)
        return [r for r in roots if lower <= r <= upper]
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        return []
    num, den = disc.numerator, disc.denominator
    root_num, root_den = _isqrt_exact(num), _isqrt_exact(den)
    if root_num is not None and root_den is not None:
        sq = Fraction(root_num, root_den)
        candidates = {(-c1 + sq) / (2 * c2), (-c1 - sq) / (2 * c2)}
    else:
        s = float(disc) ** 0.5
        candidates = {(-float(c1) + s) / (2 * float(c2)), (-float(c1) - s) / (2 * float(c2))}
    return sorted(r for r in candidates if lower <= r <= upper)


def _isqrt_exact(n: int) -> Optional[int]:
    root = math.isqrt(n)
    return root if root * root == n else None


def argmax_breakpoint(
    gamma1: SequenceLike,
    gamma2: SequenceLike,
    signs1: Sequence[int],
    signs2: Sequence[int],
    lag_a: Optional[int] = None,
    lag_b: Optional[int] = None,
) -> Optional[Union[Fraction, float]]:
    """Smallest noise magnitude in [0, 1/2] where the baseline switches lags.

    Without explicit lags the winners at x = 0 and x = 1/2 are compared.
    Returns None when both ends pick the same lag and no lags were given.
    """
    coefficients = correlation_polynomials(gamma1, gamma2, signs1, signs2)
    if lag_a is None or lag_b is None:
        low, high = breakpoint_scan(gamma1, gamma2, signs1, signs2, (Fraction(0), Fraction(1, 2)))
        lag_a, lag_b = low[1], high[1]
        if lag_a == lag_b:
            return None
    roots = crossing_points(coefficients, lag_a, lag_b)
    logger.debug("lags {} and {} cross at {}", lag_a, lag_b, roots)
    return roots[0] if roots else None
