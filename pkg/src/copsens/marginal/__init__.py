"""Marginalized risk curves, contrasts and the anchor point."""

from copsens.marginal.curves import CurveEstimate, CurveKind
from copsens.marginal.risk import (
    AnchorPoint,
    default_grid,
    find_scent,
    marginalized_or,
    marginalized_risk,
    marginalized_risk_curve,
    marginalized_rr,
    overall_vaccine_risk,
)

__all__ = [
    "AnchorPoint",
    "CurveEstimate",
    "CurveKind",
    "default_grid",
    "find_scent",
    "marginalized_or",
    "marginalized_risk",
    "marginalized_risk_curve",
    "marginalized_rr",
    "overall_vaccine_risk",
]
