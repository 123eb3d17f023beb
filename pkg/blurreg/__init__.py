"""
blurreg - registration and segmentation of blurred, quantized 1-D signals.
"""
from loguru import logger

# Silent until configure_logging or the application enables it
logger.disable("blurreg")

# Core components
from .core.errors import (
    AttributionError,
    BlurRegError,
    GridValidationError,
    InfeasibleError,
    RegimeError,
    ReproductionMismatch,
    SignalValidationError,
)
from .core.signal_model import (
    BlurModel,
    PiecewiseConstantSignal,
    QuantizedSequence,
    SamplingGrid,
    sample_sequence,
)
from .core.blur_matrices import build_matrices, measurement_matrix, difference_matrix
from .core.noise_baseline import NoiseSpec, apply_noise, cross_correlation, difference_sequence
from .core.interval_inference import extract_constraints, fuse, sigma_max, solve_bounds
from .core.alignment_dp import align, longest_path, scan_v

# Configuration
from .config import Settings, get_settings

__version__ = "0.1.0"

__all__ = [
    "BlurRegError", "SignalValidationError", "GridValidationError", "RegimeError",
    "AttributionError", "InfeasibleError", "ReproductionMismatch",
    "PiecewiseConstantSignal", "BlurModel", "SamplingGrid", "QuantizedSequence", "sample_sequence",
    "build_matrices", "measurement_matrix", "difference_matrix",
    "NoiseSpec", "apply_noise", "cross_correlation", "difference_sequence",
    "extract_constraints", "fuse", "sigma_max", "solve_bounds",
    "align", "longest_path", "scan_v",
    "Settings", "get_settings",
    "__version__",
]
