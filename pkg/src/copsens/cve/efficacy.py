"""
Controlled vaccine efficacy.

CVE(s) = 1 - r(s) / P{Y(0)=1}, where r(s) is either the marginalized risk
curve (naive CVE) or the controlled-risk bound (conservative CVE) and the
denominator is the covariate-standardized placebo-arm risk, a scalar.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from copsens.dataset.cohort import EVENT, Y, Cohort
from copsens.marginal.curves import CurveEstimate, CurveKind
from copsens.platform.errors import EstimationError, NonEstimableError, NotEvaluableError
from copsens.platform.logging import get_logger
from copsens.riskreg.cox import fit_cox_frame
from copsens.riskreg.encoding import build_encoding
from copsens.riskreg.logistic import fit_logistic_frame
from copsens.riskreg.model import Family, RiskModel, predict_many

logger = get_logger(__name__)


@dataclass(frozen=True)
class PlaceboRisk:
    estimate: float
    model: RiskModel
    n_at_risk: int

    def __post_init__(self) -> None:
        if not 0.0 < self.estimate < 1.0:
            raise NonEstimableError(f"placebo risk must lie in (0, 1), got {self.estimate}")


def placebo_marginalized_risk(
    cohort: Cohort,
    family: Family,
    covariates: Sequence[str],
    t_horizon: float | None = None,
) -> PlaceboRisk:
    """
    Average fitted placebo-arm risk over all placebo recipients at risk.

    The covariate-only model is fitted without weights on the full placebo
    arm with the same family as the vaccine-arm analysis.

    Raises:
        NonEstimableError: no placebo events
    """
    placebo = cohort.placebo()
    frame = placebo.frame
    if frame.empty:
        raise EstimationError("placebo arm is empty")
    weights = np.ones(len(frame))

    try:
        if family == "weighted-logistic":
            if frame[Y].sum() == 0:
                raise NonEstimableError("no placebo events")
            encoding = build_encoding(frame, covariates, cohort.categorical, intercept=True)
            model = fit_logistic_frame(frame, weights, encoding, None)
        else:
            if t_horizon is None:
                raise EstimationError("survival family needs t_horizon")
            if not (frame[EVENT] == 1).any():
                raise NonEstimableError("no placebo events")
            encoding = build_encoding(frame, covariates, cohort.categorical, intercept=False)
            model = fit_cox_frame(frame, weights, encoding, None, t_horizon)
    except NonEstimableError:
        raise
    except EstimationError as exc:
        raise NonEstimableError(f"placebo risk not estimable: {exc.message}", exc.details) from exc

    estimate = float(predict_many(model, None, frame).mean())
    logger.debug("placebo_risk", estimate=estimate, n=len(frame))
    return PlaceboRisk(estimate=estimate, model=model, n_at_risk=len(frame))


def cve_curve(risk_curve: CurveEstimate, placebo: PlaceboRisk | float) -> CurveEstimate:
    """
    Pointwise 1 - risk / placebo risk.

    Marginalized-risk input gives the naive curve, a controlled-risk bound the
    conservative one. Bands are not carried over; the bootstrap attaches them.
    """
    p = placebo.estimate if isinstance(placebo, PlaceboRisk) else float(placebo)
    if not p > 0.0:
        raise NonEstimableError("placebo risk is zero")
    assert np.ndim(p) == 0
    kinds = {
        CurveKind.MARGINALIZED_RISK: CurveKind.CVE_NAIVE,
        CurveKind.CONTROLLED_RISK_BOUND: CurveKind.CVE_CONSERVATIVE,
    }
    if risk_curve.kind not in kinds:
        raise ValueError(f"expected a risk curve, got {risk_curve.kind.value}")
    return CurveEstimate(
        grid=risk_curve.grid,
        point=1.0 - risk_curve.point / p,
        kind=kinds[risk_curve.kind],
        meta={**risk_curve.meta, "placebo_risk": p},
    )


@dataclass(frozen=True)
class MediationProbe:
    """CVE at the lowest grid point at or below the LLOD."""

    s: float
    cve: float
    ci_lo: float | None
    ci_hi: float | None
    llod: float

    @property
    def full_mediation_not_rejected(self) -> bool | None:
        """True when the CI contains 0; None without a CI."""
        if self.ci_lo is None or self.ci_hi is None or np.isnan(self.ci_lo) or np.isnan(self.ci_hi):
            return None
        return bool(self.ci_lo <= 0.0 <= self.ci_hi)


def mediation_probe(curve: CurveEstimate, llod: float) -> MediationProbe:
    """
    Probe CVE(s < LLOD), the direct effect not mediated by the marker.

    Raises:
        NotEvaluableError: no grid point at or below llod
    """
    below = np.flatnonzero(curve.grid <= llod)
    if below.size == 0:
        raise NotEvaluableError(
            f"no grid point at or below LLOD {llod}",
            {"llod": llod, "grid_min": float(curve.grid[0])},
        )
    j = int(below[0])
    lo = float(curve.ci_lo[j]) if curve.ci_lo is not None else None
    hi = float(curve.ci_hi[j]) if curve.ci_hi is not None else None
    return MediationProbe(s=float(curve.grid[j]), cve=float(curve.point[j]), ci_lo=lo, ci_hi=hi, llod=llod)


def cve_frame(curve: CurveEstimate, llod: float | None = None) -> pd.DataFrame:
    n = curve.grid.size
    return pd.DataFrame(
        {
            "s": curve.grid,
            "cve": curve.point,
            "ci_lo": curve.ci_lo if curve.ci_lo is not None else np.full(n, np.nan),
            "ci_hi": curve.ci_hi if curve.ci_hi is not None else np.full(n, np.nan),
            "kind": curve.kind.value,
            "llod_flag": np.zeros(n, dtype=bool) if llod is None else curve.grid <= llod,
        }
    )


def write_cve_csv(curve: CurveEstimate, path: str | Path, llod: float | None = None) -> None:
    cve_frame(curve, llod).to_csv(path, index=False)
