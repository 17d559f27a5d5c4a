"""Sensitivity analysis for unmeasured confounding: E-values and controlled-risk bounds."""

from copsens.sensitivity.bounds import (
    SensitivityMode,
    SensitivitySpec,
    bias_at,
    conservative_risk_curve,
    rru_at,
    rru_surface,
)
from copsens.sensitivity.evalues import (
    EvalueResult,
    bias_factor,
    compute_evalues,
    conservative_rr,
    conservative_rr_interval,
    evalue_point,
    evalue_ul,
)

__all__ = [
    "EvalueResult",
    "SensitivityMode",
    "SensitivitySpec",
    "bias_at",
    "bias_factor",
    "compute_evalues",
    "conservative_risk_curve",
    "conservative_rr",
    "conservative_rr_interval",
    "evalue_point",
    "evalue_ul",
    "rru_at",
    "rru_surface",
]
