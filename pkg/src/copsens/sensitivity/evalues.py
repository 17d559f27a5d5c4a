"""
E-values and bias factors for unmeasured confounding.

The E-value of a risk ratio rr < 1 is (1 + sqrt(1 - rr)) / rr: the minimum
strength, on the risk-ratio scale, that an unmeasured confounder would need
with both the marker and the outcome to explain the association away.
"""

import math

from pydantic import BaseModel, ConfigDict

from copsens.platform.errors import DomainError


class EvalueResult(BaseModel):
    """E-values for a point estimate and, optionally, the confidence limit nearest the null."""

    model_config = ConfigDict(frozen=True)

    e_point: float
    e_ul: float | None = None
    rr_point: float
    rr_ul: float | None = None
    reciprocal: bool = False


def _evalue_protective(rr: float) -> float:
    return (1.0 + math.sqrt(1.0 - rr)) / rr


def evalue_point(rr: float) -> float:
    """
    E-value for a point estimate.

    rr >= 1 is handled through its reciprocal.

    Raises:
        DomainError: rr <= 0 or not finite
    """
    if not math.isfinite(rr) or rr <= 0.0:
        raise DomainError(f"risk ratio must be positive, got {rr}")
    if rr >= 1.0:
        rr = 1.0 / rr
    return _evalue_protective(rr)


def evalue_ul(rr_ul: float) -> float:
    """
    E-value for the upper confidence limit of a protective risk ratio.

    1 when the interval reaches the null (rr_ul >= 1), otherwise the point formula.

    Raises:
        DomainError: rr_ul <= 0 or not finite
    """
    if not math.isfinite(rr_ul) or rr_ul <= 0.0:
        raise DomainError(f"confidence limit must be positive, got {rr_ul}")
    if rr_ul >= 1.0:
        return 1.0
    return _evalue_protective(rr_ul)


def compute_evalues(rr: float, rr_ul: float | None = None) -> EvalueResult:
    """
    E-values for an estimate and its confidence limit nearest the null.

    For rr > 1 the reciprocal is used and ``reciprocal`` is set; ``rr_ul`` is
    then read as the lower limit and inverted too.
    """
    if not math.isfinite(rr) or rr <= 0.0:
        raise DomainError(f"risk ratio must be positive, got {rr}")
    reciprocal = rr > 1.0
    e_ul = None
    if rr_ul is not None:
        if not math.isfinite(rr_ul) or rr_ul <= 0.0:
            raise DomainError(f"confidence limit must be positive, got {rr_ul}")
        e_ul = evalue_ul(1.0 / rr_ul if reciprocal else rr_ul)
    return EvalueResult(
        e_point=evalue_point(rr),
        e_ul=e_ul,
        rr_point=rr,
        rr_ul=rr_ul,
        reciprocal=reciprocal,
    )


def bias_factor(rr_ud: float, rr_eu: float) -> float:
    """
    B = rr_ud * rr_eu / (rr_ud + rr_eu - 1).

    Raises:
        DomainError: an argument is below 1
    """
    if not (rr_ud >= 1.0 and rr_eu >= 1.0):
        raise DomainError(f"confounding risk ratios must be >= 1, got ({rr_ud}, {rr_eu})")
    return rr_ud * rr_eu / (rr_ud + rr_eu - 1.0)


def conservative_rr(rr_m: float, b: float) -> float:
    """Upper bound RR_M * B for the controlled risk ratio."""
    if not rr_m > 0.0:
        raise DomainError(f"risk ratio must be positive, got {rr_m}")
    if not b >= 1.0:
        raise DomainError(f"bias factor must be >= 1, got {b}")
    return rr_m * b


def conservative_rr_interval(rr: float, lo: float, hi: float, b: float) -> tuple[float, float, float]:
    """Apply the bias factor to an estimate and to each confidence limit."""
    return conservative_rr(rr, b), conservative_rr(lo, b), conservative_rr(hi, b)
