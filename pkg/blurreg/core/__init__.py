"""
Core module for blurreg.

Exact sampling of blurred piecewise-constant signals, the measurement matrix
theory, the cross-correlation baseline, interval inference and the
longest-path registration DP.
"""
from .rationals import QUANT, format_rational, to_fraction
from .normal import norm_cdf, norm_ppf
from .signal_model import (
    BlurModel,
    PiecewiseConstantSignal,
    QuantizedSequence,
    RegionCounts,
    SamplingGrid,
    difference_vector,
    eval_blurred,
    quantize,
    region_counts,
    sample_sequence,
)
from .blur_matrices import (
    BlurRegime,
    DifferenceMatrix,
    MeasurementMatrix,
    blur_bound_check,
    build_matrices,
    classify_product,
    nu_threshold,
)
from .noise_baseline import (
    DifferenceSequence,
    NoiseSpec,
    apply_noise,
    ccorr_argmax,
    cross_correlation,
    difference_sequence,
)
from .interval_inference import ConstraintSystem, extract_constraints, fuse, sigma_max, solve_bounds
from .alignment_dp import AlignmentGraph, LongestPathResult, align, build_graph, longest_path, scan_v

__all__ = [
    'QUANT', 'format_rational', 'to_fraction',
    'norm_cdf', 'norm_ppf',
    'BlurModel', 'PiecewiseConstantSignal', 'QuantizedSequence', 'RegionCounts', 'SamplingGrid',
    'difference_vector', 'eval_blurred', 'quantize', 'region_counts', 'sample_sequence',
    'BlurRegime', 'DifferenceMatrix', 'MeasurementMatrix', 'build_matrices', 'classify_product',
    'blur_bound_check', 'nu_threshold',
    'DifferenceSequence', 'NoiseSpec', 'apply_noise', 'ccorr_argmax', 'cross_correlation',
    'difference_sequence',
    'ConstraintSystem', 'extract_constraints', 'fuse', 'sigma_max', 'solve_bounds',
    'AlignmentGraph', 'LongestPathResult', 'align', 'build_graph', 'longest_path', 'scan_v',
]
