"""
Joint segmentation and alignment of two difference sequences by a longest
path in a directed acyclic graph.

A segmentation vertex ``(i1, λ1, i2, λ2, n)`` pairs sample i1 of d1 with
sample i2 of d2 as the first samples after the same discontinuity; the
labels say how the blurred step shows up there (F: split with the major
share first, S: split with the major share second, A_b/A_e: unsplit step
next to a split one) and n tracks a one-sample slip between the two
sequences. Every incoming edge of a segmentation vertex carries the same
0/1 weight W, so the path weight counts matched pairs.
"""
import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache, reduce
from typing import (
    Callable,
    Dict,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

from loguru import logger

from ..config import get_settings
from .blur_matrices import DifferenceMatrix, MeasurementMatrix
from .noise_baseline import DifferenceSequence
from .rationals import format_rational, to_fraction
from .signal_model import RegionCounts

HALF = Fraction(1, 2)


class SegmentationLabel(str, Enum):
    F = "F"
    S = "S"
    A_B = "A_b"
    A_E = "A_e"


LABELS: Tuple[SegmentationLabel, ...] = tuple(SegmentationLabel)
ENTRY_LABELS = (SegmentationLabel.F, SegmentationLabel.S, SegmentationLabel.A_B)

START = "start"
END = "end"


class SegmentationVertex(NamedTuple):
    i1: int
    label1: SegmentationLabel
    i2: int
    label2: SegmentationLabel
    n: int

    def __str__(self) -> str:
        return f"({self.i1},{self.label1.value},{self.i2},{self.label2.value},{self.n})"


class AlignmentVertex(NamedTuple):
    k1: int
    k2: int

    def __str__(self) -> str:
        return f"({self.k1},{self.k2})"


Vertex = Union[str, AlignmentVertex, SegmentationVertex]

# Step rules within one sequence: positive = minimum step, negative = exact step.
_F, _S, _AB, _AE = LABELS
STEP_RULES: Dict[Tuple[SegmentationLabel, SegmentationLabel], int] = {
    (_F, _F): 2, (_F, _S): 3, (_F, _AB): 3, (_F, _AE): -2,
    (_S, _F): 2, (_S, _S): 2, (_S, _AB): 2,
    (_AB, _F): 2, (_AB, _S): 2, (_AB, _AB): 2,
    (_AE, _F): 2, (_AE, _S): 3, (_AE, _AB): 2,
}

# n -> [(n', step1 - step2)]
SUCCESSOR_SLIPS: Dict[int, Tuple[Tuple[int, int], ...]] = {
    0: ((0, 0), (1, 1), (2, -1)),
    1: ((1, 0), (0, -1)),
    2: ((2, 0), (0, 1)),
}
PREDECESSOR_SLIPS: Dict[int, Tuple[Tuple[int, int], ...]] = {
    target: tuple((source, delta) for source, slips in SUCCESSOR_SLIPS.items()
                  for t, delta in slips if t == target)
    for target in (0, 1, 2)
}

DifferenceLike = Union[DifferenceSequence, Sequence[Fraction]]


def _as_difference(d: DifferenceLike) -> DifferenceSequence:
    if isinstance(d, DifferenceSequence):
        return d
    return DifferenceSequence(tuple(to_fraction(x) for x in d))


def _check_v(v: Fraction) -> Fraction:
    v = to_fraction(v)
    if not v > 0:
        raise ValueError(f"v must be positive, got {v}")
    return v


def omega(d: DifferenceLike, i: int, label: SegmentationLabel, v: Fraction) -> Fraction:
    """Signed step estimate at index i under ``label``; 0 when the pattern fails.

    Entries outside the sequence read as 0.

    Raises:
        ValueError: if ``v`` is not positive.
    """
    v = _check_v(v)
    d = _as_difference(d)
    at = d.at
    if label is SegmentationLabel.F:
        a, b = at(i), at(i + 1)
        if a * b > 0 and abs(a) > abs(b) >= v:
            return a + b
        return Fraction(0)
    if label is SegmentationLabel.S:
        a, b = at(i - 1), at(i)
        if a * b > 0 and abs(b) > abs(a) >= v:
            return a + b
        return Fraction(0)
    if label is SegmentationLabel.A_B:
        if abs(at(i - 1)) < v <= abs(at(i)):
            if abs(at(i + 1)) >= v and not abs(at(i)) < abs(at(i + 1) + at(i + 2)):
                return Fraction(0)
            return at(i)
        return Fraction(0)
    if abs(at(i + 1)) < v <= abs(at(i)) < abs(at(i - 2) + at(i - 1)):
        return at(i)
    return Fraction(0)


def pair_weight(
    d1: DifferenceLike,
    i1: int,
    label1: SegmentationLabel,
    d2: DifferenceLike,
    i2: int,
    label2: SegmentationLabel,
    v: Fraction,
) -> int:
    """1 when both step estimates are nonzero with the same sign."""
    return 1 if omega(d1, i1, label1, v) * omega(d2, i2, label2, v) > 0 else 0


def valid_index(label: SegmentationLabel, i: int, n_samples: int) -> bool:
    """F needs a successor sample, every label needs a predecessor."""
    upper = n_samples - 2 if label is SegmentationLabel.F else n_samples - 1
    return 1 <= i <= upper


def admissible(
    label: SegmentationLabel, i: int, next_label: SegmentationLabel, j: int, n_samples: int
) -> bool:
    """Whether one sequence may move from (i, label) to (j, next_label)."""
    rule = STEP_RULES.get((label, next_label))
    if rule is None or not valid_index(next_label, j, n_samples):
        return False
    return _step_ok(rule, j - i)


def _step_ok(rule: int, step: int) -> bool:
    return step == -rule if rule < 0 else step >= rule


class MatchedPair(NamedTuple):
    i1: int
    label1: SegmentationLabel
    i2: int
    label2: SegmentationLabel
    n: int
    omega1: Fraction
    omega2: Fraction


@dataclass(frozen=True)
class LongestPathResult:
    """Best start-to-termination path and the pairs matched along it."""

    v: Fraction
    total_weight: int
    pairs: Tuple[MatchedPair, ...]
    alignment: Optional[Tuple[int, int]]
    path: Tuple[SegmentationVertex, ...] = ()
    magnitude: Fraction = Fraction(0)

    def index_pairs(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((p.i1, p.i2) for p in self.pairs)

    def to_dict(self) -> Dict:
        return {
            "v": format_rational(self.v),
            "total_weight": self.total_weight,
            "pairs": [
                {"i1": p.i1, "lambda1": p.label1.value, "i2": p.i2, "lambda2": p.label2.value, "n": p.n}
                for p in self.pairs
            ],
            "alignment": list(self.alignment) if self.alignment is not None else None,
        }


class AlignmentGraph:
    """Lazily materialized alignment graph for two difference sequences."""

    def __init__(self, d1: DifferenceLike, d2: DifferenceLike, v: Fraction):
        self.d1 = _as_difference(d1)
        self.d2 = _as_difference(d2)
        if len(self.d1) != len(self.d2):
            raise ValueError(f"sequences differ in length: {len(self.d1)} vs {len(self.d2)}")
        if len(self.d1) < 3:
            raise ValueError("alignment needs at least three samples per sequence")
        self.v = _check_v(v)
        self.N = len(self.d1)
        self._omega1 = {(i, lab): omega(self.d1, i, lab, self.v) for i in range(self.N) for lab in LABELS}
        self._omega2 = {(i, lab): omega(self.d2, i, lab, self.v) for i in range(self.N) for lab in LABELS}
        denominators = [x.denominator for x in (*self.d1, *self.d2)]
        self.scale = reduce(lambda a, b: a * b // math.gcd(a, b), denominators, 1)

    def omega1(self, i: int, label: SegmentationLabel) -> Fraction:
        return self._omega1.get((i, label), Fraction(0))

    def omega2(self, i: int, label: SegmentationLabel) -> Fraction:
        return self._omega2.get((i, label), Fraction(0))

    def weight(self, vertex: SegmentationVertex) -> int:
        """W of the head vertex; independent of n."""
        return 1 if self.omega1(vertex.i1, vertex.label1) * self.omega2(vertex.i2, vertex.label2) > 0 else 0

    def magnitude(self, vertex: SegmentationVertex) -> Fraction:
        return abs(self.omega1(vertex.i1, vertex.label1)) + abs(self.omega2(vertex.i2, vertex.label2))

    def alignment_vertices(self) -> List[AlignmentVertex]:
        out = [AlignmentVertex(0, 0)]
        out += [AlignmentVertex(0, k) for k in range(1, self.N - 1)]
        out += [AlignmentVertex(k, 0) for k in range(1, self.N - 1)]
        return out

    @staticmethod
    def alignment_of(i1: int, i2: int) -> AlignmentVertex:
        """The alignment vertex whose diagonal passes through (i1, i2)."""
        if i1 >= i2:
            return AlignmentVertex(i1 - i2, 0)
        return AlignmentVertex(0, i2 - i1)

    def segmentation_vertices(self) -> Iterator[SegmentationVertex]:
        for i1 in range(1, self.N):
            for i2 in range(1, self.N):
                for l1 in LABELS:
                    if not valid_index(l1, i1, self.N):
                        continue
                    for l2 in LABELS:
                        if not valid_index(l2, i2, self.N):
                            continue
                        for n in (0, 1, 2):
                            yield SegmentationVertex(i1, l1, i2, l2, n)

    def successors(self, vertex: Vertex) -> Iterator[Tuple[Vertex, int]]:
        """Out-neighbours of ``vertex`` with edge weights."""
        N = self.N
        if vertex == START:
            for a in self.alignment_vertices():
                yield a, 0
            return
        if vertex == END:
            return
        if isinstance(vertex, AlignmentVertex):
            for l in range(1, N):
                i1, i2 = vertex.k1 + l, vertex.k2 + l
                for l1 in ENTRY_LABELS:
                    if not valid_index(l1, i1, N):
                        continue
                    for l2 in ENTRY_LABELS:
                        if valid_index(l2, i2, N):
                            target = SegmentationVertex(i1, l1, i2, l2, 0)
                            yield target, self.weight(target)
            return
        yield END, 0
        for n_next, delta in SUCCESSOR_SLIPS[vertex.n]:
            for step1 in range(2, N):
                step2 = step1 - delta
                if step2 < 2:
                    continue
                j1, j2 = vertex.i1 + step1, vertex.i2 + step2
                if j1 >= N or j2 >= N:
                    continue
                for l1 in LABELS:
                    if not admissible(vertex.label1, vertex.i1, l1, j1, N):
                        continue
                    for l2 in LABELS:
                        if admissible(vertex.label2, vertex.i2, l2, j2, N):
                            target = SegmentationVertex(j1, l1, j2, l2, n_next)
                            yield target, self.weight(target)


def build_graph(d1: DifferenceLike, d2: DifferenceLike, v: Fraction) -> AlignmentGraph:
    """Alignment graph for two equal-length difference sequences.

    Raises:
        ValueError: if ``v`` is not positive or the lengths differ.
    """
    return AlignmentGraph(d1, d2, v)


# DP key: (-weight, -magnitude, pair list, alignment order); smaller is better.
_Key = Tuple[int, int, Tuple[Tuple[int, int], ...], Tuple[int, int, int]]
_Entry = Tuple[_Key, Union[AlignmentVertex, SegmentationVertex]]


def _alignment_order(a: AlignmentVertex) -> Tuple[int, int, int]:
    return (abs(a.k1 - a.k2), a.k1, a.k2)


def _better(a: Optional[_Entry], b: Optional[_Entry]) -> Optional[_Entry]:
    if a is None:
        return b
    if b is None:
        return a
    return b if b[0] < a[0] else a


def longest_path(graph: AlignmentGraph) -> LongestPathResult:
    """Maximum-weight path with deterministic tie-breaking.

    Ties in weight go to the larger total |ω1| + |ω2| over matched pairs,
    then to the lexicographically smallest list of matched (i1, i2), then to
    the alignment vertex with the smallest |k1 - k2|, k1, k2.

    Vertices are processed by increasing i1; every edge raises i1 by at
    least two, so each vertex pulls from finished rows only. Predecessors
    with a minimum-step rule lie on a prefix of one diagonal and are read
    from running prefix maxima.
    """
    N = graph.N
    scale = graph.scale
    best: Dict[SegmentationVertex, _Entry] = {}
    cum: Dict[Tuple[SegmentationLabel, SegmentationLabel, int, int], List[Optional[_Entry]]] = {}
    incoming = {
        target: [(src, rule) for (src, dst), rule in STEP_RULES.items() if dst is target]
        for target in LABELS
    }

    def lookup(sl1, r1, sl2, r2, src_n, i1, i2, delta) -> Optional[_Entry]:
        c = (i1 - i2) - delta
        if r1 < 0:
            s1 = i1 + r1
            s2 = s1 - c
            if s2 < 1 or not _step_ok(r2, i2 - s2):
                return None
            return best.get(SegmentationVertex(s1, sl1, s2, sl2, src_n))
        if r2 < 0:
            s2 = i2 + r2
            s1 = s2 + c
            if s1 < 1 or not _step_ok(r1, i1 - s1):
                return None
            return best.get(SegmentationVertex(s1, sl1, s2, sl2, src_n))
        limit = min(i1 - r1, i2 - r2 + c)
        if limit < 1:
            return None
        arr = cum.get((sl1, sl2, src_n, c))
        return arr[limit] if arr is not None else None

    for i1 in range(1, N):
        row: Dict[Tuple[SegmentationLabel, SegmentationLabel, int, int], _Entry] = {}
        for i2 in range(1, N):
            alignment = graph.alignment_of(i1, i2)
            for l1 in LABELS:
                if not valid_index(l1, i1, N):
                    continue
                for l2 in LABELS:
                    if not valid_index(l2, i2, N):
                        continue
                    probe = SegmentationVertex(i1, l1, i2, l2, 0)
                    w = graph.weight(probe)
                    mag = int(graph.magnitude(probe) * scale) if w else 0
                    for n in (0, 1, 2):
                        cand: Optional[_Entry] = None
                        if n == 0 and l1 in ENTRY_LABELS and l2 in ENTRY_LABELS:
                            cand = ((0, 0, (), _alignment_order(alignment)), alignment)
                        for src_n, delta in PREDECESSOR_SLIPS[n]:
                            for sl1, r1 in incoming[l1]:
                                for sl2, r2 in incoming[l2]:
                                    cand = _better(cand, lookup(sl1, r1, sl2, r2, src_n, i1, i2, delta))
                        if cand is None:
                            continue
                        (nw, nm, pairs, order), _ = cand
                        if w:
                            key = (nw - w, nm - mag, pairs + ((i1, i2),), order)
                        else:
                            key = (nw, nm, pairs, order)
                        vertex = SegmentationVertex(i1, l1, i2, l2, n)
                        best[vertex] = (key, cand[1])
                        row[(l1, l2, n, i1 - i2)] = (key, vertex)
        for k in set(cum) | set(row):
            arr = cum.get(k)
            if arr is None:
                arr = cum[k] = [None] * N
            arr[i1] = _better(arr[i1 - 1], row.get(k))

    logger.debug("longest path over {} reachable vertices (N={}, v={})", len(best), N, graph.v)
    if not best:
        return LongestPathResult(graph.v, 0, (), None)

    winner: Optional[Tuple[_Key, SegmentationVertex]] = None
    for vertex, (key, _) in best.items():
        if winner is None or key < winner[0]:
            winner = (key, vertex)
    key, vertex = winner
    path: List[SegmentationVertex] = []
    node: Union[AlignmentVertex, SegmentationVertex] = vertex
    while isinstance(node, SegmentationVertex):
        path.append(node)
        node = best[node][1]
    path.reverse()
    pairs = tuple(
        MatchedPair(p.i1, p.label1, p.i2, p.label2, p.n, graph.omega1(p.i1, p.label1), graph.omega2(p.i2, p.label2))
        for p in path
        if graph.weight(p)
    )
    return LongestPathResult(
        v=graph.v,
        total_weight=-key[0],
        pairs=pairs,
        alignment=(node.k1, node.k2),
        path=tuple(path),
        magnitude=Fraction(-key[1], scale),
    )


def align(d1: DifferenceLike, d2: DifferenceLike, v: Fraction) -> LongestPathResult:
    return longest_path(build_graph(d1, d2, v))


def v_grid(denominator: Optional[int] = None) -> List[Fraction]:
    """Candidate thresholds k/denominator in (0, 1)."""
    den = denominator or get_settings().V_SCAN_DENOMINATOR
    return [Fraction(k, den) for k in range(1, den)]


def _signature(d1: DifferenceSequence, d2: DifferenceSequence, v: Fraction) -> Tuple[bool, ...]:
    # every ω compares |d| against v and otherwise only d against d
    return tuple(abs(x) >= v for x in (*d1, *d2))


@dataclass
class VScanResult:
    """DP outcome for each scanned v."""

    results: Dict[Fraction, LongestPathResult] = field(default_factory=dict)

    @property
    def best_weight(self) -> int:
        return max((r.total_weight for r in self.results.values()), default=0)

    @property
    def best_vs(self) -> List[Fraction]:
        top = self.best_weight
        return sorted(v for v, r in self.results.items() if r.total_weight == top)

    def matching(self, predicate: Callable[[LongestPathResult], bool]) -> List[Fraction]:
        return sorted(v for v, r in self.results.items() if predicate(r))


def scan_v(d1: DifferenceLike, d2: DifferenceLike, denominator: Optional[int] = None) -> VScanResult:
    """Run the DP for every v = k/denominator in (0, 1).

    Thresholds that classify every |d| entry the same way share one run.
    """
    d1, d2 = _as_difference(d1), _as_difference(d2)
    cache: Dict[Tuple[bool, ...], LongestPathResult] = {}
    scan = VScanResult()
    for v in v_grid(denominator):
        sig = _signature(d1, d2, v)
        if sig not in cache:
            cache[sig] = align(d1, d2, v)
        result = cache[sig]
        scan.results[v] = replace(result, v=v)
    logger.debug("v scan: {} thresholds, {} distinct DP runs", len(scan.results), len(cache))
    return scan


def find_v(
    d1: DifferenceLike,
    d2: DifferenceLike,
    predicate: Callable[[LongestPathResult], bool],
    start: Optional[Fraction] = None,
    denominator: Optional[int] = None,
) -> Optional[LongestPathResult]:
    """Smallest scanned v (at or above ``start``) whose result satisfies ``predicate``."""
    d1, d2 = _as_difference(d1), _as_difference(d2)
    tried: Set[Tuple[bool, ...]] = set()
    for v in v_grid(denominator):
        if start is not None and v < start:
            continue
        sig = _signature(d1, d2, v)
        if sig in tried:
            continue
        tried.add(sig)
        result = align(d1, d2, v)
        if predicate(result):
            return result
    return None


def enumerate_paths(graph: AlignmentGraph) -> Iterator[Tuple[int, Tuple[Vertex, ...]]]:
    """Every start-to-termination path with its weight. Exponential; small N only."""

    def walk(vertex: Vertex, weight: int, trail: Tuple[Vertex, ...]):
        if vertex == END:
            yield weight, trail
            return
        for nxt, w in graph.successors(vertex):
            yield from walk(nxt, weight + w, trail + (nxt,))

    yield from walk(START, 0, (START,))


def reference_longest_weight(graph: AlignmentGraph) -> int:
    """Longest path weight by memoized recursion over the explicit edges."""

    @lru_cache(maxsize=None)
    def tail(vertex: Vertex) -> int:
        return max((w + tail(nxt) for nxt, w in graph.successors(vertex)), default=0)

    return tail(START)


def to_dot(graph: AlignmentGraph, result: Optional[LongestPathResult] = None) -> str:
    """DOT text of the reachable graph, or of one result's path only."""
    lines = ["digraph alignment {", "  rankdir=LR;"]
    if result is not None:
        chain: List[Vertex] = [START]
        if result.alignment is not None:
            chain.append(AlignmentVertex(*result.alignment))
        chain += list(result.path) + [END]
        for a, b in zip(chain, chain[1:]):
            w = graph.weight(b) if isinstance(b, SegmentationVertex) else 0
            lines.append(f'  "{a}" -> "{b}" [label="{w}"];')
    else:
        seen: Set[Vertex] = {START}
        stack: List[Vertex] = [START]
        while stack:
            vertex = stack.pop()
            for nxt, w in graph.successors(vertex):
                lines.append(f'  "{vertex}" -> "{nxt}" [label="{w}"];')
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
    lines.append("}")
    return "\n".join(lines)


@dataclass(frozen=True)
class ExactnessThresholds:
    """Noise thresholds and index sets under which the DP is exact.

    ``products`` holds the noiseless M_D g_D of each sequence; an empty
    index set leaves its threshold at infinity.
    """

    tau_f: Union[Fraction, float]
    tau_s: Union[Fraction, float]
    tau_a: Union[Fraction, float]
    tau_ab: Union[Fraction, float]
    tau_ae: Union[Fraction, float]
    zero_sets: Tuple[Tuple[int, ...], Tuple[int, ...]]
    b_f: Tuple[Tuple[int, ...], Tuple[int, ...]]
    b_s: Tuple[Tuple[int, ...], Tuple[int, ...]]
    b_ab: Tuple[Tuple[int, ...], Tuple[int, ...]]
    b_ae: Tuple[Tuple[int, ...], Tuple[int, ...]]
    products: Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]

    @property
    def tau(self) -> Union[Fraction, float]:
        return min(self.tau_f, self.tau_s, self.tau_a, self.tau_ab, self.tau_ae)


@dataclass(frozen=True)
class ExactnessCheck:
    violations: Tuple[str, ...]
    ordering_violations: Tuple[str, ...] = ()

    @property
    def holds(self) -> bool:
        return not self.violations

    @property
    def holds_all(self) -> bool:
        """Also requires the orderings the A_b and A_e weights rely on."""
        return not self.violations and not self.ordering_violations

    def __bool__(self) -> bool:
        return self.holds


def exactness_thresholds(
    M1: MeasurementMatrix,
    M2: MeasurementMatrix,
    MD1: DifferenceMatrix,
    MD2: DifferenceMatrix,
    g_d: Sequence[Fraction],
    counts1: RegionCounts,
    counts2: RegionCounts,
) -> ExactnessThresholds:
    g_d = tuple(to_fraction(g) for g in g_d)
    taus: Dict[str, List[Fraction]] = defaultdict(list)
    zero_sets, b_f, b_s, b_ab, b_ae, products = [], [], [], [], [], []
    for M, MD, counts in ((M1, MD1, counts1), (M2, MD2, counts2)):
        m = len(g_d) - 1
        product = MD.apply(g_d)
        products.append(product)
        zero_sets.append(tuple(i for i, p in enumerate(product) if p == 0))
        sets: Dict[str, Set[int]] = defaultdict(set)
        for j, i in enumerate(counts.iota):
            step = abs(g_d[j])
            if M.at(i, j) < 1:
                taus["F"].append(min(M.at(i, j) - HALF, 1 - M.at(i, j)) * step)
            if M.at(i - 1, j) > 0:
                taus["S"].append(min(HALF - M.at(i - 1, j), M.at(i - 1, j)) * step)
            if MD.at(i + 1, j) > 0:
                sets["F"].add(i)
            if MD.at(i - 1, j) > 0:
                sets["S"].add(i)
            if MD.at(i, j) != 1:
                continue
            taus["A"].append(step)
            if j + 1 <= m and MD.at(i + 1, j + 1) > 0:
                taus["Ab"].append(HALF * abs(step - MD.at(i + 1, j + 1) * abs(g_d[j + 1])))
                sets["Ab"].add(i)
            if j >= 1 and MD.at(i - 1, j - 1) > 0:
                taus["Ae"].append(HALF * abs(step - MD.at(i - 1, j - 1) * abs(g_d[j - 1])))
                sets["Ae"].add(i)
        b_f.append(tuple(sorted(sets["F"])))
        b_s.append(tuple(sorted(sets["S"])))
        b_ab.append(tuple(sorted(sets["Ab"])))
        b_ae.append(tuple(sorted(sets["Ae"])))

    def smallest(name: str) -> Union[Fraction, float]:
        return min(taus[name]) if taus[name] else math.inf

    return ExactnessThresholds(
        tau_f=smallest("F"),
        tau_s=smallest("S"),
        tau_a=smallest("A"),
        tau_ab=smallest("Ab"),
        tau_ae=smallest("Ae"),
        zero_sets=tuple(zero_sets),
        b_f=tuple(b_f),
        b_s=tuple(b_s),
        b_ab=tuple(b_ab),
        b_ae=tuple(b_ae),
        products=tuple(products),
    )


def verify_exactness_conditions(
    d1: DifferenceLike, d2: DifferenceLike, thresholds: ExactnessThresholds, v: Fraction
) -> ExactnessCheck:
    """Check the noise conditions that guarantee exact registration at ``v``."""
    v = to_fraction(v)
    violations: List[str] = []
    ordering: List[str] = []
    if not 0 < v < thresholds.tau:
        violations.append(f"v outside (0, tau): v={v}, tau={thresholds.tau}")
    for k, d in enumerate((_as_difference(d1), _as_difference(d2))):
        name = f"d{k + 1}"
        zeros = set(thresholds.zero_sets[k])
        for i, truth in enumerate(thresholds.products[k]):
            x = d.at(i)
            if i in zeros:
                if not abs(x) < v:
                    violations.append(f"{name}[{i}]={x} is not below v in the zero set")
            elif truth > 0 and not x >= v:
                violations.append(f"{name}[{i}]={x} should be >= v")
            elif truth < 0 and not x <= -v:
                violations.append(f"{name}[{i}]={x} should be <= -v")
        for i in thresholds.b_f[k]:
            if not abs(d.at(i)) > abs(d.at(i + 1)):
                violations.append(f"{name}: |d[{i}]| does not exceed |d[{i + 1}]|")
        for i in thresholds.b_s[k]:
            if not abs(d.at(i)) > abs(d.at(i - 1)):
                violations.append(f"{name}: |d[{i}]| does not exceed |d[{i - 1}]|")
        for i in thresholds.b_ab[k]:
            if not abs(d.at(i)) < abs(d.at(i + 1) + d.at(i + 2)):
                ordering.append(f"{name}: |d[{i}]| not below |d[{i + 1}] + d[{i + 2}]|")
        for i in thresholds.b_ae[k]:
            if not abs(d.at(i)) < abs(d.at(i - 2) + d.at(i - 1)):
                ordering.append(f"{name}: |d[{i}]| not below |d[{i - 2}] + d[{i - 1}]|")
    return ExactnessCheck(tuple(violations), tuple(ordering))
