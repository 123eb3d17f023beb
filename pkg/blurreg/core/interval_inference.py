"""
Interval inference of sampling offsets, discontinuity positions and blur width.

Each noiseless quantized sample of a signal with known amplitudes pins the
blurred value to a 1/256 window. Attributed to a plateau or to a single
transition, that window bounds the Φ argument (t + i - D_j)/σ, giving
difference constraints of the form ``u - w < a + b·σ`` between the first
sample time ``t`` of a sequence and the discontinuities ``D_1..D_m``
(``D0`` is fixed at zero and serves as the reference).

At a fixed σ the bounds form a difference-constraint graph; Bellman-Ford
from every variable gives the tightest implied interval of every
difference and detects infeasibility as a negative cycle.
"""
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

from loguru import logger

from ..config import get_settings
from .errors import AttributionError, InfeasibleError
from .normal import invert_increasing, norm_isf, norm_ppf, norm_sf
from .rationals import HALF_QUANTUM, QUANT, to_fraction
from .signal_model import BlurModel, PiecewiseConstantSignal

REFERENCE = "D0"

# Relaxations smaller than this are treated as rounding, not as a negative cycle.
CYCLE_TOL = 1e-12

AmplitudesLike = Union[PiecewiseConstantSignal, Sequence[Union[Fraction, int, str]]]


class StateKind(str, Enum):
    PLATEAU = "plateau"
    TRANSITION = "transition"


class SampleState(NamedTuple):
    """Plateau r (level L_r) or transition j (between L_j and L_{j+1})."""

    kind: StateKind
    index: int

    def __str__(self) -> str:
        prefix = "P" if self.kind is StateKind.PLATEAU else "T"
        return f"{prefix}{self.index}"


class LinearForm(NamedTuple):
    """a + b·σ, with lengths in units of T."""

    a: float
    b: float

    def at(self, sigma: float) -> float:
        return self.a + self.b * sigma


@dataclass(frozen=True)
class AffineBound:
    """upper - lower < offset + sign·Q(probability).

    Q is the quantile of the blur displacement: σ·Φ⁻¹(p) for a pure
    Gaussian. Hand-written bounds carry ``coefficient`` instead of a
    probability and read ``upper - lower < offset + coefficient·σ``.
    """

    upper: str
    lower: str
    offset: float
    sign: int = 1
    probability: Optional[Fraction] = None
    coefficient: Optional[float] = None
    source: str = ""
    index: int = -1

    def __post_init__(self):
        if (self.probability is None) == (self.coefficient is None):
            raise ValueError("a bound needs exactly one of probability or coefficient")
        if self.probability is not None:
            p = to_fraction(self.probability)
            if not 0 < p < 1:
                raise ValueError(f"bound probability must lie in (0, 1), got {p}")
            object.__setattr__(self, "probability", p)
        if self.upper == self.lower:
            raise ValueError(f"a bound needs two distinct variables, got {self.upper}")

    @classmethod
    def linear(cls, upper: str, lower: str, a: float, b: float, source: str = "manual") -> "AffineBound":
        return cls(upper, lower, float(a), coefficient=float(b), source=source)

    @property
    def b(self) -> float:
        """σ coefficient under a pure Gaussian blur."""
        if self.coefficient is not None:
            return self.coefficient
        return self.sign * _gaussian_quantile(self.probability)

    @property
    def a(self) -> float:
        return self.offset

    def constant(self, sigma: float) -> float:
        return self.offset + self.b * sigma

    def mixture_constant(self, blur: BlurModel) -> float:
        if self.probability is None:
            if blur.is_pure:
                return self.constant(blur.sigma)
            raise ValueError("hand-written bounds have no meaning under a mixture blur")
        return self.offset + self.sign * mixture_quantile(blur, self.probability)

    def holds(self, values: Dict[str, float], sigma: float) -> bool:
        return values[self.upper] - values[self.lower] < self.constant(sigma)

    def __str__(self) -> str:
        op = "+" if self.b >= 0 else "-"
        return f"{self.upper} - {self.lower} < {self.offset:g} {op} {abs(self.b):.4f}σ"


@dataclass
class ConstraintSystem:
    """A set of affine difference bounds over named variables."""

    bounds: List[AffineBound] = field(default_factory=list)
    variables: List[str] = field(default_factory=lambda: [REFERENCE])

    def add(self, bound: AffineBound) -> None:
        for name in (bound.upper, bound.lower):
            if name not in self.variables:
                self.variables.append(name)
        self.bounds.append(bound)

    def extend(self, bounds: Iterable[AffineBound]) -> None:
        for bound in bounds:
            self.add(bound)

    def __len__(self) -> int:
        return len(self.bounds)

    def violations(self, values: Dict[str, float], sigma: float) -> List[AffineBound]:
        """Bounds not satisfied by a concrete assignment (``D0`` defaults to 0)."""
        values = {REFERENCE: 0.0, **values}
        return [b for b in self.bounds if not b.holds(values, sigma)]


@dataclass(frozen=True)
class BoundsSolution:
    """Tightest implied intervals at one σ, relative to ``D0``."""

    sigma: float
    feasible: bool
    intervals: Dict[str, Tuple[float, float]]
    distances: Dict[str, Dict[str, float]] = field(default_factory=dict, repr=False)

    def difference(self, upper: str, lower: str) -> Tuple[float, float]:
        """Interval of ``upper - lower``."""
        if not self.feasible:
            raise InfeasibleError(f"system is infeasible at sigma={self.sigma:g}", self.sigma)
        return (-self.distances[upper][lower], self.distances[lower][upper])


@dataclass(frozen=True)
class VariableBounds:
    variable: str
    reference: str
    lower: Optional[LinearForm]
    upper: Optional[LinearForm]


def _gaussian_quantile(p: Fraction) -> float:
    if p <= Fraction(1, 2):
        return norm_ppf(float(p))
    return norm_isf(float(1 - p))


def mixture_quantile(blur: BlurModel, p: Fraction) -> float:
    """Displacement z with F(z) = p for the mixture CDF F."""
    p = to_fraction(p)
    if blur.is_pure:
        return blur.sigma * _gaussian_quantile(p)
    scale = blur.max_sigma
    if p <= Fraction(1, 2):
        return invert_increasing(lambda z: blur.cdf(z), float(p), -scale, scale)
    q = float(1 - p)

    def neg_sf(z: float) -> float:
        return -sum(float(w) * norm_sf(z / s) for w, s in blur.components)

    return invert_increasing(neg_sf, -q, -scale, scale)


def _levels(amplitudes: AmplitudesLike) -> Tuple[Fraction, ...]:
    if isinstance(amplitudes, PiecewiseConstantSignal):
        return amplitudes.levels
    values = tuple(to_fraction(a) for a in amplitudes)
    if not values:
        raise ValueError("at least one amplitude is required")
    return (Fraction(0),) + values + (Fraction(0),)


def attribute_samples(gamma: Sequence[Fraction], amplitudes: AmplitudesLike) -> Tuple[SampleState, ...]:
    """Assign every sample to a plateau or a transition, monotonically.

    States run P0, T0, P1, ..., Tm, P(m+1). A plateau sample equals its
    level, a transition sample lies strictly between the neighbouring
    levels and each transition holds at most one sample. An interior
    plateau may only be skipped between two occupied transitions. The
    first sample sits in P0 or T0 and the last one at or after Tm. Among
    valid assignments the lexicographically smallest is returned.

    Raises:
        AttributionError: if no valid assignment exists.
    """
    levels = _levels(amplitudes)
    values = tuple(to_fraction(g) for g in gamma)
    m = len(levels) - 2
    n_states = 2 * m + 3
    n = len(values)
    if n == 0:
        raise AttributionError("cannot attribute an empty sequence")

    def matches(value: Fraction, s: int) -> bool:
        if s % 2 == 0:
            return value == levels[s // 2]
        j = s // 2
        lo, hi = sorted((levels[j], levels[j + 1]))
        return lo < value < hi

    def allowed(s: int, s2: int) -> bool:
        if s2 == s:
            return s % 2 == 0
        if s2 < s:
            return False
        if s2 - s == 2 and s % 2 == 1:
            return True
        return not any(k % 2 == 0 and 2 <= k <= 2 * m for k in range(s + 1, s2))

    ok = [[False] * n_states for _ in range(n)]
    for s in range(n_states):
        ok[n - 1][s] = s >= 2 * m + 1 and matches(values[n - 1], s)
    for i in range(n - 2, -1, -1):
        for s in range(n_states):
            if matches(values[i], s):
                ok[i][s] = any(ok[i + 1][s2] for s2 in range(s, n_states) if allowed(s, s2))

    starts = [s for s in (0, 1) if ok[0][s]]
    if not starts:
        raise AttributionError(
            f"sample 0 = {values[0]} cannot start a valid plateau/transition assignment"
        )
    path = [starts[0]]
    for i in range(1, n):
        prev = path[-1]
        path.append(next(s2 for s2 in range(prev, n_states) if allowed(prev, s2) and ok[i][s2]))
    return tuple(
        SampleState(StateKind.PLATEAU, s // 2) if s % 2 == 0 else SampleState(StateKind.TRANSITION, s // 2)
        for s in path
    )


def extract_constraints(
    gamma: Sequence[Fraction],
    amplitudes: AmplitudesLike,
    variable: str = "t1",
) -> ConstraintSystem:
    """Constraints implied by one noiseless sequence with known amplitudes.

    ``variable`` names the time of the sequence's first sample; sample i
    sits at ``variable + i``.

    Raises:
        AttributionError: if the samples cannot be attributed.
    """
    levels = _levels(amplitudes)
    m = len(levels) - 2
    steps = tuple(levels[j + 1] - levels[j] for j in range(m + 1))
    tails = tuple(Fraction(1, 2 * QUANT) / abs(s) for s in steps)
    states = attribute_samples(gamma, levels[1:-1])
    system = ConstraintSystem()
    for name in [variable] + [f"D{j}" for j in range(1, m + 1)]:
        if name not in system.variables:
            system.variables.append(name)

    def after(i: int, j: int, p: Fraction) -> None:
        # t + i - D_j > Q(p)
        system.add(AffineBound(f"D{j}", variable, float(i), -1, p, source=variable, index=i))

    def before(i: int, j: int, p: Fraction) -> None:
        # t + i - D_j < Q(p)
        system.add(AffineBound(variable, f"D{j}", float(-i), 1, p, source=variable, index=i))

    for i, (value, state) in enumerate(zip(gamma, states)):
        value = to_fraction(value)
        if state.kind is StateKind.PLATEAU:
            r = state.index
            if r >= 1:
                after(i, r - 1, 1 - tails[r - 1])
            if r <= m:
                before(i, r, tails[r])
            continue
        j = state.index
        lo, hi = sorted(((value - HALF_QUANTUM - levels[j]) / steps[j],
                         (value + HALF_QUANTUM - levels[j]) / steps[j]))
        if lo > 0:
            after(i, j, lo)
        if hi < 1:
            before(i, j, hi)
        if j >= 1:
            after(i, j - 1, 1 - tails[j - 1])
        if j + 1 <= m:
            before(i, j + 1, tails[j + 1])
    logger.debug(
        "extracted {} bounds for {} from {} samples ({})",
        len(system), variable, len(states), " ".join(str(s) for s in states),
    )
    return system


def fuse(*systems: ConstraintSystem) -> ConstraintSystem:
    """Intersection of systems; variables with equal names are shared."""
    fused = ConstraintSystem()
    for system in systems:
        for name in system.variables:
            if name not in fused.variables:
                fused.variables.append(name)
        fused.extend(system.bounds)
    return fused


def _bellman_ford(
    variables: Sequence[str], edges: Sequence[Tuple[str, str, float]], source: str
) -> Tuple[Dict[str, float], bool]:
    dist = {v: math.inf for v in variables}
    dist[source] = 0.0
    for _ in range(len(variables) - 1):
        changed = False
        for u, v, w in edges:
            if dist[u] != math.inf and dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            break
    has_negative_cycle = any(
        dist[u] != math.inf and dist[u] + w < dist[v] - CYCLE_TOL for u, v, w in edges
    )
    return dist, has_negative_cycle


def _solve(system: ConstraintSystem, constant: Callable[[AffineBound], float], sigma: float) -> BoundsSolution:
    # u - w <= c is the edge w -> u with weight c
    edges = [(b.lower, b.upper, constant(b)) for b in system.bounds]
    distances: Dict[str, Dict[str, float]] = {}
    for source in system.variables:
        dist, negative = _bellman_ford(system.variables, edges, source)
        if negative:
            return BoundsSolution(sigma, False, {})
        distances[source] = dist
    intervals = {
        v: (-distances[v][REFERENCE], distances[REFERENCE][v])
        for v in system.variables
        if v != REFERENCE
    }
    return BoundsSolution(sigma, True, intervals, distances)


def solve_bounds(system: ConstraintSystem, sigma: float) -> BoundsSolution:
    """Tightest intervals of every variable (relative to ``D0``) at a fixed σ.

    Infeasibility is reported through ``BoundsSolution.feasible``.

    Raises:
        ValueError: if ``sigma`` is not positive.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return _solve(system, lambda b: b.constant(sigma), sigma)


def is_feasible(system: ConstraintSystem, sigma: float) -> bool:
    return solve_bounds(system, sigma).feasible


def sigma_max(
    system: ConstraintSystem,
    lower: float = 1e-9,
    upper: Optional[float] = None,
    tol: Optional[float] = None,
) -> float:
    """Largest σ keeping the system feasible, by bisection.

    Returns ``math.inf`` when the system is still feasible at the search
    ceiling ``Settings.SIGMA_SEARCH_MAX``.

    Raises:
        InfeasibleError: if the system is infeasible even at ``lower``.
    """
    settings = get_settings()
    upper = upper if upper is not None else settings.SIGMA_SEARCH_MAX
    tol = tol if tol is not None else settings.SIGMA_TOLERANCE
    if not is_feasible(system, lower):
        raise InfeasibleError(f"constraint system is infeasible for every sigma >= {lower:g}", lower)
    if is_feasible(system, upper):
        logger.debug("system feasible up to the search ceiling {}", upper)
        return math.inf
    lo, hi = lower, upper
    steps = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_feasible(system, mid):
            lo = mid
        else:
            hi = mid
        steps += 1
    logger.debug("sigma_max={:.8f} after {} bisection steps", lo, steps)
    return lo


def affine_bounds(
    system: ConstraintSystem,
    reference: str = REFERENCE,
    sigmas: Tuple[float, float] = (1e-3, 2e-3),
) -> Dict[str, VariableBounds]:
    """Recover (a, b) of each variable's interval ends from two small σ values.

    Raises:
        InfeasibleError: if the system is infeasible at either σ.
    """
    s1, s2 = sigmas
    first, second = solve_bounds(system, s1), solve_bounds(system, s2)
    for solution in (first, second):
        if not solution.feasible:
            raise InfeasibleError(f"system is infeasible at sigma={solution.sigma:g}", solution.sigma)

    def fit(v1: float, v2: float) -> Optional[LinearForm]:
        if math.isinf(v1) or math.isinf(v2):
            return None
        b = (v2 - v1) / (s2 - s1)
        return LinearForm(v1 - b * s1, b)

    out = {}
    for v in system.variables:
        if v == reference:
            continue
        lo1, hi1 = first.difference(v, reference)
        lo2, hi2 = second.difference(v, reference)
        out[v] = VariableBounds(v, reference, fit(lo1, lo2), fit(hi1, hi2))
    return out


def mixture_feasible(system: ConstraintSystem, blur: BlurModel) -> bool:
    """Whether the observations behind ``system`` fit a fixed mixture blur."""
    reference_sigma = blur.max_sigma
    solution = _solve(system, lambda b: b.mixture_constant(blur), reference_sigma)
    logger.debug("mixture with {} components feasible: {}", len(blur.components), solution.feasible)
    return solution.feasible
