"""
copsens error hierarchy.

Every error carries a process exit code: 2 for data/configuration problems,
3 for numerical fitting problems. The CLI maps errors to exit codes through
``exit_code`` and reports them with ``to_dict``.
"""

from typing import Any


class CopsensError(Exception):
    """Base error for all copsens failures."""

    exit_code: int = 2

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": self.__class__.__name__,
            "message": self.message,
            "details": self.details,
        }


# =============================================================================
# DATA / CONFIGURATION ERRORS (exit 2)
# =============================================================================


class ConfigError(CopsensError):
    """Invalid or unreadable configuration / scenario file."""


class SchemaError(CopsensError):
    """CSV does not provide the columns the schema requires."""


class RowValidationError(CopsensError):
    """A single input row violates a record invariant."""


class DesignError(CopsensError):
    """Two-phase design cannot be estimated (e.g. no sampled non-cases in a stratum)."""


class DegenerateMarkerError(CopsensError):
    """Marker has too few distinct values for the requested coding."""


class CollinearityError(CopsensError):
    """Design matrix is rank deficient."""


class PredictionError(CopsensError):
    """Covariate values cannot be encoded under a fitted model."""


class EstimationError(CopsensError):
    """An estimator received no usable data."""


class NonEstimableError(EstimationError):
    """A quantity is undefined for the data at hand (zero risk, no events, ...)."""


class NoInformationError(EstimationError):
    """No events before the analysis horizon."""


class DomainError(CopsensError):
    """Argument outside the mathematical domain of a formula."""


class AnchoringError(CopsensError):
    """Anchor marker value is not a point of the curve grid."""


class NotEvaluableError(CopsensError):
    """A probe cannot be evaluated on the supplied curve."""


class ConfidenceIntervalError(CopsensError):
    """Percentile interval requested from unusable replicates."""


# =============================================================================
# FITTING ERRORS (exit 3)
# =============================================================================


class ConvergenceError(CopsensError):
    """Newton iterations did not converge."""

    exit_code = 3


class SeparationError(ConvergenceError):
    """Coefficients diverge (complete or quasi-complete separation)."""


class BootstrapFailureError(CopsensError):
    """Too many bootstrap replicates failed."""

    exit_code = 3
