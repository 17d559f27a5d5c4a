"""
Sensitivity specification and controlled-risk bounds.

The common-RR_U mode sets RR_UD = RR_EU = RR_U and lets log RR_U grow
linearly with the marker distance: RR_U(s1, s2) = exp(gamma * (s2 - s1)),
calibrated so that RR_U at the fixed pair equals ``rr_ud_fix``. The bias
factor B(s1, s2) then bounds how far confounding can push the
marginalized risk ratio away from the controlled one.
"""

import enum
import hashlib
import math
from collections.abc import Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from copsens.dataset.cohort import weighted_quantile
from copsens.marginal.curves import CurveEstimate, CurveKind
from copsens.platform.errors import AnchoringError, DomainError
from copsens.platform.logging import get_logger
from copsens.sensitivity.evalues import bias_factor

logger = get_logger(__name__)


class SensitivityMode(str, enum.Enum):
    COMMON_RRU_LOGLINEAR = "common-rru-loglinear"
    FIXED_PAIR_ONLY = "fixed-pair-only"


class SensitivitySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    rr_ud_fix: float = Field(..., ge=1.0)
    rr_eu_fix: float = Field(..., ge=1.0)
    s1_fix: float
    s2_fix: float
    mode: SensitivityMode = SensitivityMode.COMMON_RRU_LOGLINEAR

    @model_validator(mode="after")
    def _check(self) -> "SensitivitySpec":
        if not self.s1_fix < self.s2_fix:
            raise ValueError("s1_fix must be smaller than s2_fix")
        if self.mode == SensitivityMode.COMMON_RRU_LOGLINEAR and self.rr_ud_fix != self.rr_eu_fix:
            raise ValueError("common-rru-loglinear mode requires rr_ud_fix == rr_eu_fix")
        return self

    @property
    def gamma(self) -> float:
        return math.log(self.rr_ud_fix) / (self.s2_fix - self.s1_fix)

    @property
    def b_fix(self) -> float:
        return bias_factor(self.rr_ud_fix, self.rr_eu_fix)

    def digest(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()[:16]

    @classmethod
    def from_quantiles(
        cls,
        rr_u_fix: float,
        s1_fix_quantile: float,
        s2_fix_quantile: float,
        markers: Sequence[float] | np.ndarray,
        weights: Sequence[float] | np.ndarray | None = None,
    ) -> "SensitivitySpec":
        """Common-RR_U spec with the fixed pair at weighted marker quantiles."""
        if not 0.0 < s1_fix_quantile < s2_fix_quantile < 1.0:
            raise DomainError("fixed quantiles must satisfy 0 < q1 < q2 < 1")
        s1, s2 = weighted_quantile(markers, weights, [s1_fix_quantile, s2_fix_quantile])
        if not s1 < s2:
            raise DomainError(
                "fixed quantiles map to the same marker value",
                {"s1": float(s1), "s2": float(s2)},
            )
        return cls(rr_ud_fix=rr_u_fix, rr_eu_fix=rr_u_fix, s1_fix=float(s1), s2_fix=float(s2))


def rru_at(spec: SensitivitySpec, s1: float, s2: float) -> float:
    """
    RR_U(s1, s2) = exp(gamma * (s2 - s1)).

    Raises:
        DomainError: s1 > s2, or the spec is not in common-RR_U mode
    """
    if s1 > s2:
        raise DomainError(f"rru_at needs s1 <= s2, got ({s1}, {s2})")
    if spec.mode != SensitivityMode.COMMON_RRU_LOGLINEAR:
        raise DomainError("RR_U away from the fixed pair needs common-rru-loglinear mode")
    return math.exp(spec.gamma * (s2 - s1))


def bias_at(spec: SensitivitySpec, s1: float, s2: float) -> float:
    """B(s1, s2); in fixed-pair-only mode only the fixed pair is defined."""
    if spec.mode == SensitivityMode.FIXED_PAIR_ONLY:
        if math.isclose(s1, spec.s1_fix) and math.isclose(s2, spec.s2_fix):
            return spec.b_fix
        raise DomainError("fixed-pair-only spec defines B only at the fixed pair")
    rr_u = rru_at(spec, s1, s2)
    return bias_factor(rr_u, rr_u)


def _transform(values: np.ndarray, grid: np.ndarray, scent: float, spec: SensitivitySpec) -> np.ndarray:
    out = np.empty_like(values)
    for j, s in enumerate(grid):
        if s >= scent:
            out[j] = values[j] * bias_at(spec, scent, s)
        else:
            out[j] = values[j] / bias_at(spec, s, scent)
    return out


def conservative_risk_curve(curve: CurveEstimate, scent: float, spec: SensitivitySpec) -> CurveEstimate:
    """
    Controlled-risk bound curve anchored at ``scent``.

    Right of the anchor risks are multiplied by B(scent, s), left of it divided
    by B(s, scent), so the curve is pulled toward the anchor value. CI bands get
    the same transformation. Results are clamped to [0, 1].

    Raises:
        AnchoringError: scent is not a grid point
    """
    hits = np.flatnonzero(np.isclose(curve.grid, scent, rtol=0.0, atol=1e-12))
    if hits.size == 0:
        raise AnchoringError(f"anchor {scent} is not on the curve grid")
    scent = float(curve.grid[hits[0]])

    def clamp(values: np.ndarray, label: str) -> np.ndarray:
        outside = (values < 0.0) | (values > 1.0)
        if outside.any():
            logger.warning("risk_bound_clamped", band=label, points=int(outside.sum()))
        return np.clip(values, 0.0, 1.0)

    point = clamp(_transform(curve.point, curve.grid, scent, spec), "point")
    lo = hi = None
    if curve.ci_lo is not None and curve.ci_hi is not None:
        lo = clamp(_transform(curve.ci_lo, curve.grid, scent, spec), "ci_lo")
        hi = clamp(_transform(curve.ci_hi, curve.grid, scent, spec), "ci_hi")
    return CurveEstimate(
        grid=curve.grid,
        point=point,
        kind=CurveKind.CONTROLLED_RISK_BOUND,
        ci_lo=lo,
        ci_hi=hi,
        meta={
            **curve.meta,
            "scent": scent,
            "anchoring": "r_C(scent) = r_M(scent) assumed",
            "sensitivity_spec": spec.digest(),
        },
    )


def rru_surface(spec: SensitivitySpec, grid: Sequence[float] | np.ndarray) -> pd.DataFrame:
    """RR_U and B over all grid pairs s1 <= s2, long format (s1, s2, rr_u, b)."""
    g = np.asarray(grid, dtype=float)
    if np.any(np.diff(g) <= 0):
        raise DomainError("surface grid must be strictly increasing")
    i, j = np.triu_indices(g.size)
    rr_u = np.exp(spec.gamma * (g[j] - g[i]))
    b = np.array([bias_factor(float(r), float(r)) for r in rr_u])
    return pd.DataFrame({"s1": g[i], "s2": g[j], "rr_u": rr_u, "b": b})
