"""
Exact rational helpers on the 1/256 quantization grid.
"""
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Tuple, Union

QUANT = 256
QUANTUM = Fraction(1, QUANT)
HALF_QUANTUM = Fraction(1, 2 * QUANT)

RationalLike = Union[int, Fraction, str]


def round_half_even(value: Fraction) -> int:
    """Round an exact rational to the nearest integer, ties to even."""
    lower = value.numerator // value.denominator
    upper = lower + 1
    below = value - lower
    above = upper - value
    if below < above:
        return lower
    if below > above:
        return upper
    return lower if lower % 2 == 0 else upper


def to_fraction(value: Union[RationalLike, float]) -> Fraction:
    """Convert ints, Fractions, floats and "num/den" strings to a Fraction.

    Floats are converted exactly (binary value), strings are parsed
    exactly, so ``"0.1"`` is 1/10 while ``0.1`` is not.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError as e:
            raise ValueError(f"Cannot parse rational '{value}'") from e
    raise TypeError(f"Unsupported rational type: {type(value).__name__}")


def on_grid(value: Fraction) -> bool:
    """True when ``value`` is an integer multiple of 1/256."""
    return (value * QUANT).denominator == 1


def from_numerators(numerators: Iterable[int]) -> Tuple[Fraction, ...]:
    return tuple(Fraction(int(n), QUANT) for n in numerators)


def to_numerators(values: Iterable[Fraction]) -> Tuple[int, ...]:
    """Numerators over 256; raises if a value is off the grid."""
    out = []
    for value in values:
        scaled = Fraction(value) * QUANT
        if scaled.denominator != 1:
            raise ValueError(f"{value} is not a multiple of 1/{QUANT}")
        out.append(scaled.numerator)
    return tuple(out)


def format_rational(value: Fraction) -> str:
    """Serialize as "num/256" when on the grid, else the reduced "num/den"."""
    value = Fraction(value)
    if on_grid(value):
        return f"{(value * QUANT).numerator}/{QUANT}"
    return f"{value.numerator}/{value.denominator}"
