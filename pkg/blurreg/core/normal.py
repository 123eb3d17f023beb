"""
Standard normal distribution helpers.

Φ and Φ⁻¹ come from ``scipy.special`` (``ndtr`` keeps relative precision in
the lower tail, so upper tails are taken by symmetry). Quantiles of other
increasing CDFs, such as Gaussian mixtures, go through ``scipy.optimize.brentq``.
"""
from typing import Callable, Optional

from scipy.optimize import brentq
from scipy.special import ndtr, ndtri

from ..config import get_settings

CdfFunction = Callable[[float], float]

# bracket doublings before invert_increasing gives up
MAX_BRACKET_STEPS = 64


def norm_cdf(x: float) -> float:
    """Φ(x)."""
    return float(ndtr(x))


def norm_sf(x: float) -> float:
    """Upper tail 1 − Φ(x), accurate for large positive x."""
    return float(ndtr(-x))


def _check_probability(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p}")


def norm_ppf(p: float) -> float:
    """Φ⁻¹(p) for 0 < p < 1."""
    _check_probability(p)
    return float(ndtri(p))


def norm_isf(q: float) -> float:
    """Inverse upper tail: x with 1 − Φ(x) = q, without forming 1 − q."""
    _check_probability(q)
    return -float(ndtri(q))


def invert_increasing(
    func: Callable[[float], float], target: float, lo: float = -1.0, hi: float = 1.0,
    tol: Optional[float] = None,
) -> float:
    """Solve ``func(z) = target`` for an increasing ``func``.

    The bracket ``[lo, hi]`` is doubled outward until it straddles the
    target, then handed to Brent's method with absolute tolerance ``tol``
    (default ``Settings.PPF_TOLERANCE``).
    """
    tol = tol if tol is not None else get_settings().PPF_TOLERANCE
    for _ in range(MAX_BRACKET_STEPS):
        if func(lo) <= target:
            break
        lo = 2.0 * lo if lo < 0 else lo - 1.0
    else:
        raise ValueError(f"no lower bracket found for target {target}")
    for _ in range(MAX_BRACKET_STEPS):
        if func(hi) >= target:
            break
        hi = 2.0 * hi if hi > 0 else hi + 1.0
    else:
        raise ValueError(f"no upper bracket found for target {target}")
    return float(brentq(lambda z: func(z) - target, lo, hi, xtol=tol))
