"""
Exception hierarchy for blurreg.

Every error raised on purpose by the library derives from ``BlurRegError``.
The ``exit_code`` attribute is what the command line reports for it.
"""
from typing import Iterable, List, Optional


class BlurRegError(Exception):
    """Base class for all blurreg errors."""

    exit_code: int = 1


class SignalValidationError(BlurRegError, ValueError):
    """A signal or blur model violates its construction invariants."""

    exit_code = 2


class GridValidationError(BlurRegError, ValueError):
    """A sampling grid is incompatible with the signal it samples."""

    exit_code = 2


class RegimeError(BlurRegError):
    """The scenario is outside the blur regime the matrix theory covers."""

    exit_code = 3


class AttributionError(BlurRegError):
    """A quantized sample cannot be explained by any plateau or transition."""

    exit_code = 3


class InfeasibleError(BlurRegError):
    """A difference-constraint system admits no solution."""

    exit_code = 3

    def __init__(self, message: str, sigma: Optional[float] = None):
        super().__init__(message)
        self.sigma = sigma


class ReproductionMismatch(BlurRegError):
    """One or more reproduction checks failed."""

    exit_code = 4

    def __init__(self, failures: Iterable[str]):
        self.failures: List[str] = list(failures)
        super().__init__(
            f"{len(self.failures)} reproduction check(s) failed: "
            + "; ".join(self.failures)
        )
