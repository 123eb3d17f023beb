"""
End-to-end runs: sample, add noise, correlate, align and infer, then report.

``run_scenario`` executes one configured scenario. ``reproduce_worked_example``
runs the built-in four-region scenario and checks every reference number,
collecting all mismatches before raising.
"""
import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Collection, Dict, List, Optional, Sequence, Tuple, Union

from loguru import logger

from ..config.scenario import EXAMPLE_SIGNS, ScenarioConfig, worked_example_config
from .alignment_dp import (
    ExactnessThresholds,
    LongestPathResult,
    align,
    exactness_thresholds,
    find_v,
    scan_v,
    verify_exactness_conditions,
)
from .blur_matrices import DifferenceMatrix, MeasurementMatrix, build_matrices, classify_product
from .errors import BlurRegError, ReproductionMismatch
from .interval_inference import affine_bounds, extract_constraints, fuse, sigma_max
from .noise_baseline import (
    DifferenceSequence,
    NoiseSpec,
    apply_noise,
    argmax_breakpoint,
    breakpoint_scan,
    ccorr_argmax,
    ccorr_argmax_all,
    cross_correlation,
    difference_sequence,
)
from .normal import CdfFunction, norm_cdf
from .rationals import format_rational
from .signal_model import (
    QuantizedSequence,
    RegionCounts,
    difference_vector,
    region_counts,
    sample_sequence,
)

EXPECTED_GAMMA = (
    (0, 144, 256, 256, -256, -256, 16, 256, 256, -256, -256, 0, 0),
    (0, 256, 256, -205, -256, -256, 256, 256, -218, -256, -22, 0, 0),
)
EXPECTED_PAIRS = ((1, 1), (4, 3), (6, 6), (9, 8), (11, 10))
EXPECTED_BREAKPOINT = Fraction(682, 2483)
# last noise level at which the DP still recovers every pair
DP_SUCCESS_LIMIT = 77
DP_FAILURE_LIMIT = 102
COEFFICIENT_TOL = 0.02


@dataclass
class RunReport:
    """Everything a run produced, serializable with exact rationals."""

    name: str
    gammas: Tuple[Tuple[Fraction, ...], ...] = ()
    ys: Tuple[Tuple[Fraction, ...], ...] = ()
    ds: Tuple[Tuple[Fraction, ...], ...] = ()
    matrices: Dict[str, Any] = field(default_factory=dict)
    correlation: Dict[int, Fraction] = field(default_factory=dict)
    baseline_argmax: Optional[int] = None
    baseline_ties: Tuple[int, ...] = ()
    alignment: Optional[LongestPathResult] = None
    v_candidates: Tuple[Fraction, ...] = ()
    exactness: Dict[str, Any] = field(default_factory=dict)
    bounds: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)
    raw_matrices: List[Tuple[MeasurementMatrix, DifferenceMatrix]] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, name: str, ok: bool, detail: str = "") -> bool:
        self.checks[name] = bool(ok)
        if not ok:
            self.failures.append(f"{name}: {detail}" if detail else name)
            logger.warning("check failed: {} {}", name, detail)
        return ok

    def to_dict(self) -> Dict[str, Any]:
        def seqs(values):
            return [[format_rational(x) for x in seq] for seq in values]

        return {
            "name": self.name,
            "gamma": seqs(self.gammas),
            "y": seqs(self.ys),
            "d": seqs(self.ds),
            "matrices": self.matrices,
            "baseline": {
                "argmax": self.baseline_argmax,
                "ties": list(self.baseline_ties),
            },
            "alignment": self.alignment.to_dict() if self.alignment is not None else None,
            "v_candidates": [format_rational(v) for v in self.v_candidates],
            "exactness": self.exactness,
            "bounds": self.bounds,
            "checks": dict(sorted(self.checks.items())),
            "failures": list(self.failures),
        }


def _summarize_matrices(
    M: MeasurementMatrix, MD: DifferenceMatrix, g_d: Sequence[Fraction], counts: RegionCounts
) -> Dict[str, Any]:
    product = classify_product(MD, g_d, counts)
    return {
        "regime": M.regime.value,
        "column_forms": [f.value for f in M.column_forms],
        "iota": list(M.iota),
        "critical": [
            {"row": i, "col": j, "value": format_rational(x)}
            for i, row in enumerate(M.entries)
            for j, x in enumerate(row)
            if 0 < x < 1
        ],
        "product_labels": [label.value for label in product.labels()],
        "sparsity_violations": list(product.sparsity_violations),
    }


def _bounds_report(gammas: Sequence[QuantizedSequence], amplitudes, labels=("t1", "t2")) -> Dict[str, Any]:
    systems = [extract_constraints(g, amplitudes, label) for g, label in zip(gammas, labels)]
    fused = fuse(*systems)
    limit = sigma_max(fused)
    out = {}
    for name, bound in affine_bounds(fused).items():
        out[name] = {
            "lower": list(bound.lower) if bound.lower is not None else None,
            "upper": list(bound.upper) if bound.upper is not None else None,
        }
    finite = not math.isinf(limit)
    return {
        "variables": out,
        "sigma_max": limit if finite else "inf",
        "T_over_sigma_max": 1.0 / limit if finite else 0.0,
    }


STAGES = ("matrices", "baseline", "align", "infer")


def run_scenario(
    config: ScenarioConfig,
    cdf: CdfFunction = norm_cdf,
    stages: Optional[Collection[str]] = None,
) -> RunReport:
    """Sample and add noise, then run the requested stages.

    ``stages`` picks from ``STAGES``; by default every stage runs and
    inference follows ``config.infer``. The noise-free threshold report
    needs the matrices, so it is filled only when both matrices and
    alignment run.

    Raises:
        SignalValidationError, GridValidationError: for invalid inputs.
        RegimeError: when the scenario is outside the supported blur regime.
        InfeasibleError, AttributionError: when inference cannot proceed.
    """
    if stages is None:
        stages = {"matrices", "baseline", "align"} | ({"infer"} if config.infer else set())
    unknown = set(stages) - set(STAGES)
    if unknown:
        raise ValueError(f"unknown stages {sorted(unknown)}; choose from {STAGES}")

    report = RunReport(config.name)
    signal, blur = config.to_signal(), config.to_blur()
    grids = config.to_grids()
    gammas = tuple(sample_sequence(signal, blur, grid, cdf) for grid in grids)
    report.gammas = tuple(tuple(g) for g in gammas)
    g_d = difference_vector(signal)
    counts = [region_counts(signal, grid) for grid in grids]

    ys = tuple(apply_noise(gamma, config.noise.spec(k)) for k, gamma in enumerate(gammas))
    ds = tuple(difference_sequence(y) for y in ys)
    report.ys = tuple(tuple(y) for y in ys)
    report.ds = tuple(tuple(d) for d in ds)

    if "matrices" in stages:
        report.raw_matrices = [build_matrices(signal, blur, grid, gamma, cdf) for grid, gamma in zip(grids, gammas)]
        report.matrices = {
            f"seq{k + 1}": _summarize_matrices(M, MD, g_d, c)
            for k, ((M, MD), c) in enumerate(zip(report.raw_matrices, counts))
        }

    if "baseline" in stages:
        report.correlation = cross_correlation(ys[0], ys[1])
        report.baseline_argmax = ccorr_argmax(report.correlation)
        report.baseline_ties = ccorr_argmax_all(report.correlation)

    if "align" in stages:
        _run_alignment(config, report, ds)
        if report.raw_matrices:
            (M1, MD1), (M2, MD2) = report.raw_matrices
            thresholds = exactness_thresholds(M1, M2, MD1, MD2, g_d, counts[0], counts[1])
            report.exactness = _thresholds_report(thresholds)
            if report.alignment is not None:
                verdict = verify_exactness_conditions(ds[0], ds[1], thresholds, report.alignment.v)
                report.exactness["conditions_hold"] = verdict.holds
                report.exactness["violations"] = list(verdict.violations)

    if "infer" in stages:
        report.bounds = _bounds_report(gammas, signal)

    logger.info(
        "scenario '{}': stages {}, baseline lag {}, DP weight {}",
        config.name, sorted(stages), report.baseline_argmax,
        report.alignment.total_weight if report.alignment is not None else None,
    )
    return report


def _run_alignment(config: ScenarioConfig, report: RunReport, ds: Sequence[DifferenceSequence]) -> None:
    wanted = tuple(tuple(p) for p in config.expected_pairs) if config.expected_pairs is not None else None
    if config.v_value is not None and not config.v_scan:
        report.alignment = align(ds[0], ds[1], config.v_value)
        report.v_candidates = (config.v_value,)
    else:
        scan = scan_v(ds[0], ds[1], config.v_denominator)
        report.v_candidates = tuple(scan.best_vs)
        if wanted is not None:
            hits = scan.matching(lambda r: r.index_pairs() == wanted)
            if hits:
                report.v_candidates = tuple(hits)
        if report.v_candidates:
            report.alignment = scan.results[report.v_candidates[0]]
    if wanted is not None:
        got = report.alignment.index_pairs() if report.alignment is not None else ()
        report.check("alignment_pairs", got == wanted, f"expected {wanted}, got {got}")


def _thresholds_report(thresholds: ExactnessThresholds) -> Dict[str, Any]:
    return {
        "tau": _format_threshold(thresholds.tau),
        "tau_f": _format_threshold(thresholds.tau_f),
        "tau_s": _format_threshold(thresholds.tau_s),
        "tau_a": _format_threshold(thresholds.tau_a),
        "tau_ab": _format_threshold(thresholds.tau_ab),
        "tau_ae": _format_threshold(thresholds.tau_ae),
        "b_f": [list(s) for s in thresholds.b_f],
        "b_s": [list(s) for s in thresholds.b_s],
    }


def _format_threshold(value: Union[Fraction, float]) -> str:
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return format_rational(value)


def reproduce_worked_example(
    cdf: CdfFunction = norm_cdf,
    dp_limit: int = DP_SUCCESS_LIMIT,
) -> RunReport:
    """Reproduce the four-region example and check every reference value.

    Raises:
        ReproductionMismatch: listing every failed check.
    """
    config = worked_example_config()
    report = RunReport(config.name)
    signal, blur = config.to_signal(), config.to_blur()
    grids = config.to_grids()
    gammas = tuple(sample_sequence(signal, blur, grid, cdf) for grid in grids)
    report.gammas = tuple(tuple(g) for g in gammas)
    for k, (gamma, expected) in enumerate(zip(gammas, EXPECTED_GAMMA)):
        got = gamma.numerators()
        report.check(f"gamma{k + 1}", got == expected, f"expected {expected}, got {got}")
    expected_gammas = tuple(QuantizedSequence.from_numerators(e) for e in EXPECTED_GAMMA)

    try:
        for k, (grid, gamma) in enumerate(zip(grids, gammas)):
            M, MD = build_matrices(signal, blur, grid, gamma, cdf)
            product = classify_product(MD, difference_vector(signal), region_counts(signal, grid), signal.discontinuities)
            report.check(f"matrices{k + 1}_identity", M.apply(difference_vector(signal)) == tuple(gamma))
            report.check(f"matrices{k + 1}_product", product.matches_direct and not product.sparsity_violations,
                         "; ".join(product.sparsity_violations))
    except BlurRegError as e:
        report.check("matrices", False, str(e))

    signs = tuple(NoiseSpec.from_pattern(0, p).signs for p in EXAMPLE_SIGNS)
    xs = [Fraction(k, 256) for k in range(0, 129)]
    scan = breakpoint_scan(expected_gammas[0], expected_gammas[1], signs[0], signs[1], xs)
    wrong = [format_rational(x) for x, lag in scan if lag != (-1 if x <= Fraction(70, 256) else -5)]
    report.check("baseline_scan", not wrong, f"unexpected argmax at x in {wrong}")
    crossing = argmax_breakpoint(expected_gammas[0], expected_gammas[1], signs[0], signs[1], -1, -5)
    report.check("baseline_breakpoint", crossing == EXPECTED_BREAKPOINT, f"got {crossing}")
    report.baseline_argmax = scan[0][1]

    failed_x = []
    for k in range(0, dp_limit + 1):
        x = Fraction(k, 256)
        ds = [
            difference_sequence(apply_noise(g, NoiseSpec(x, signs=s)))
            for g, s in zip(expected_gammas, signs)
        ]
        hit = find_v(ds[0], ds[1], lambda r: r.index_pairs() == EXPECTED_PAIRS, start=x + Fraction(1, 512))
        if hit is None:
            failed_x.append(format_rational(x))
        elif k == 0:
            report.alignment = hit
            report.ds = tuple(tuple(d) for d in ds)
    report.check("dp_success_range", not failed_x, f"no v recovers the pairs at x in {failed_x}")

    unexpected_x = []
    for k in range(dp_limit + 1, DP_FAILURE_LIMIT + 1):
        x = Fraction(k, 256)
        ds = [
            difference_sequence(apply_noise(g, NoiseSpec(x, signs=s)))
            for g, s in zip(expected_gammas, signs)
        ]
        if find_v(ds[0], ds[1], lambda r: r.index_pairs() == EXPECTED_PAIRS) is not None:
            unexpected_x.append(format_rational(x))
    report.check("dp_failure_range", not unexpected_x, f"pairs recovered beyond the success range at x in {unexpected_x}")

    try:
        single = extract_constraints(expected_gammas[0], signal, "t1")
        first = [b for b in single.bounds if b.upper == "t1" and b.lower == "D0" and b.index == 0]
        report.check("t1_saturated", any(abs(b.a) < 1e-9 and abs(b.b + 2.88) <= COEFFICIENT_TOL for b in first),
                     f"sample 0 gave {[str(b) for b in first]}")
        coefficients = affine_bounds(single)
        t1, d2 = coefficients["t1"], coefficients["D2"]
        report.check("t1_plus_T_lower", abs(t1.lower.a + 1) < 1e-6 and abs(t1.lower.b - 0.15) <= COEFFICIENT_TOL,
                     f"got {t1.lower}")
        report.check("t1_plus_T_upper", abs(t1.upper.a + 1) < 1e-6 and abs(t1.upper.b - 0.17) <= COEFFICIENT_TOL,
                     f"got {t1.upper}")
        report.check("D2_lower", abs(d2.lower.a - 5) < 1e-6 and abs(d2.lower.b - 0.06) <= COEFFICIENT_TOL,
                     f"got {d2.lower}")
        report.check("D2_upper", abs(d2.upper.a - 5) < 1e-6 and abs(d2.upper.b - 0.1) <= COEFFICIENT_TOL,
                     f"got {d2.upper}")
        report.bounds = _bounds_report(expected_gammas, signal)
        ratio = report.bounds["T_over_sigma_max"]
        report.check("sigma_max", 7.5 <= ratio <= 7.75, f"T/sigma_max = {ratio:.4f}")
    except BlurRegError as e:
        report.check("inference", False, str(e))

    if report.failures:
        raise ReproductionMismatch(report.failures)
    logger.info("reproduction passed {} checks", len(report.checks))
    return report


def write_report_json(report: RunReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_sequences_csv(report: RunReport, path: Union[str, Path]) -> Path:
    """One row per sample index with every sequence as "num/den"."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns: List[Tuple[str, Sequence[Fraction]]] = []
    for prefix, group in (("gamma", report.gammas), ("y", report.ys), ("d", report.ds)):
        columns += [(f"{prefix}{k + 1}", seq) for k, seq in enumerate(group)]
    n = max((len(seq) for _, seq in columns), default=0)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index"] + [name for name, _ in columns])
        for i in range(n):
            writer.writerow([i] + [format_rational(seq[i]) if i < len(seq) else "" for _, seq in columns])
    return path


def write_correlation_csv(correlation: Dict[int, Fraction], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lag", "numerator", "denominator"])
        for lag in sorted(correlation):
            value = correlation[lag] * 256 * 256
            writer.writerow([lag, int(value), 256 * 256])
    return path


def write_matrix_csv(M: Union[MeasurementMatrix, DifferenceMatrix], path: Union[str, Path]) -> Path:
    """Exact entries as "num/den" strings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row"] + [f"col{j}" for j in range(M.n_cols)])
        for i, row in enumerate(M.entries):
            writer.writerow([i] + [format_rational(x) for x in row])
    return path


def write_forms_json(
    M: Union[MeasurementMatrix, DifferenceMatrix], summary: Dict[str, Any], path: Union[str, Path]
) -> Path:
    """Column and row form tags for a matrix written by ``write_matrix_csv``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(M, MeasurementMatrix):
        forms = {
            "matrix": "measurement",
            "regime": M.regime.value,
            "column_forms": [f.value for f in M.column_forms],
            "iota": list(M.iota),
            "critical_per_row": list(M.critical_rows()),
        }
    else:
        forms = {
            "matrix": "difference",
            "nonzero_per_row": list(M.nonzero_per_row()),
            "row_labels": list(summary.get("product_labels", [])),
            "sparsity_violations": list(summary.get("sparsity_violations", [])),
        }
    path.write_text(json.dumps(forms, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_bounds_csv(bounds: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variable", "lower_a", "lower_b", "upper_a", "upper_b"])
        for name, entry in sorted(bounds.get("variables", {}).items()):
            lower = entry["lower"] or ["", ""]
            upper = entry["upper"] or ["", ""]
            writer.writerow([name, *lower, *upper])
    return path


def write_report_csv(report: RunReport, directory: Union[str, Path]) -> List[Path]:
    directory = Path(directory)
    written = [write_sequences_csv(report, directory / "sequences.csv")]
    for k, (M, MD) in enumerate(report.raw_matrices, start=1):
        summary = report.matrices.get(f"seq{k}", {})
        for name, matrix in ((f"measurement{k}", M), (f"difference{k}", MD)):
            written.append(write_matrix_csv(matrix, directory / f"{name}.csv"))
            written.append(write_forms_json(matrix, summary, directory / f"{name}_forms.json"))
    if report.correlation:
        written.append(write_correlation_csv(report.correlation, directory / "correlation.csv"))
    if report.bounds:
        written.append(write_bounds_csv(report.bounds, directory / "bounds.csv"))
    return written
