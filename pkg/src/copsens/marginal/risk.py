"""
Marginalized risk by IPW g-computation.

r_M(s) = sum_i r(s, X_i) / pi_i  /  sum_i 1 / pi_i

over the phase-two vaccine recipients, i.e. the conditional risk model
averaged over the (design-weighted) vaccine-arm covariate distribution.
"""

from dataclasses import dataclass

import numpy as np

from copsens.dataset.cohort import ARM, MARKER, Y, Cohort, weighted_quantile
from copsens.dataset.design import TwoPhaseDesign
from copsens.marginal.curves import CurveEstimate, CurveKind
from copsens.platform.config import settings
from copsens.platform.errors import DegenerateMarkerError, EstimationError, NonEstimableError
from copsens.platform.logging import get_logger
from copsens.riskreg.model import RiskModel, predict_many

logger = get_logger(__name__)


def _phase_two_with_weights(cohort: Cohort, design: TwoPhaseDesign) -> tuple[Cohort, np.ndarray]:
    two = cohort.phase_two()
    if len(two) == 0:
        raise EstimationError("empty phase-two set")
    return two, design.weights(two.frame)


def marginalized_risk(model: RiskModel, cohort: Cohort, design: TwoPhaseDesign, s: float) -> float:
    """
    r_M(s) for one marker value.

    Raises:
        EstimationError: the cohort has no phase-two vaccine recipients
    """
    two, w = _phase_two_with_weights(cohort, design)
    return float(np.average(predict_many(model, s, two.frame), weights=w))


def marginalized_risk_curve(
    model: RiskModel,
    cohort: Cohort,
    design: TwoPhaseDesign,
    grid: np.ndarray,
    check_support: bool = True,
) -> CurveEstimate:
    """
    r_M(s) over a grid.

    Grid points outside the observed phase-two marker range are dropped with a
    warning listing them, unless ``check_support`` is off (bootstrap replicates
    keep the original grid). Tertile-coded models are evaluated as given.
    """
    two, w = _phase_two_with_weights(cohort, design)
    grid = np.asarray(grid, dtype=float)

    if check_support and model.encoding.marker_term == "marker":
        observed = two.frame[MARKER].to_numpy(dtype=float)
        lo, hi = observed.min(), observed.max()
        outside = (grid < lo - 1e-12) | (grid > hi + 1e-12)
        if outside.any():
            logger.warning(
                "grid_support_trimmed",
                trimmed=[round(float(s), 6) for s in grid[outside]],
                support=(float(lo), float(hi)),
            )
            grid = grid[~outside]
            if grid.size == 0:
                raise EstimationError("no grid point inside the observed marker range")

    wn = w / w.sum()
    point = np.array([float(predict_many(model, s, two.frame) @ wn) for s in grid])
    return CurveEstimate(grid=grid, point=point, kind=CurveKind.MARGINALIZED_RISK)


def default_grid(
    cohort: Cohort,
    design: TwoPhaseDesign,
    points: int = 101,
    lo: float = 0.025,
    hi: float = 0.975,
) -> np.ndarray:
    """Equally spaced grid between weighted marker quantiles ``lo`` and ``hi``."""
    two, w = _phase_two_with_weights(cohort, design)
    q_lo, q_hi = weighted_quantile(two.frame[MARKER].to_numpy(dtype=float), w, [lo, hi])
    if not q_hi > q_lo:
        raise DegenerateMarkerError(
            "marker quantiles coincide; cannot build a grid",
            {"lo": float(q_lo), "hi": float(q_hi)},
        )
    return np.linspace(q_lo, q_hi, points)


def _risk_pair(model: RiskModel, cohort: Cohort, design: TwoPhaseDesign, s1: float, s2: float) -> tuple[float, float]:
    two, w = _phase_two_with_weights(cohort, design)
    wn = w / w.sum()
    r1 = float(predict_many(model, s1, two.frame) @ wn)
    r2 = float(predict_many(model, s2, two.frame) @ wn)
    return r1, r2


def marginalized_rr(model: RiskModel, cohort: Cohort, design: TwoPhaseDesign, s1: float, s2: float) -> float:
    """
    RR_M(s1, s2) = r_M(s2) / r_M(s1).

    Raises:
        NonEstimableError: r_M(s1) is zero
    """
    r1, r2 = _risk_pair(model, cohort, design, s1, s2)
    if r1 <= 0.0:
        raise NonEstimableError("marginalized risk at s1 is zero", {"s1": s1})
    return r2 / r1


def marginalized_or(model: RiskModel, cohort: Cohort, design: TwoPhaseDesign, s1: float, s2: float) -> float:
    """
    Marginalized odds ratio of r_M(s2) against r_M(s1).

    Raises:
        NonEstimableError: a marginalized risk equals 0 or 1
    """
    r1, r2 = _risk_pair(model, cohort, design, s1, s2)
    if not (0.0 < r1 < 1.0 and 0.0 < r2 < 1.0):
        raise NonEstimableError("odds undefined for risks 0 or 1", {"r1": r1, "r2": r2})
    return (r2 / (1.0 - r2)) / (r1 / (1.0 - r1))


def overall_vaccine_risk(cohort: Cohort) -> float:
    """P(Y=1 | A=1) in phase one."""
    vac = cohort.frame[cohort.frame[ARM] == 1]
    if vac.empty:
        raise EstimationError("no vaccine-arm records")
    return float(vac[Y].mean())


@dataclass(frozen=True)
class AnchorPoint:
    """Grid point s_cent where r_M is closest to the overall vaccine-arm risk."""

    s: float
    index: int
    gap: float
    warning: str | None = None


def find_scent(curve: CurveEstimate, overall_risk: float) -> AnchorPoint:
    """
    Grid point minimizing |r_M(s) - overall_risk|; ties go to the smaller s.

    A warning is attached (and logged) when the minimal gap exceeds
    SCENT_MAX_RELATIVE_GAP of the overall risk.
    """
    gaps = np.abs(curve.point - overall_risk)
    idx = int(np.argmin(gaps))
    gap = float(gaps[idx])
    warning = None
    if overall_risk > 0 and gap / overall_risk > settings.SCENT_MAX_RELATIVE_GAP:
        warning = (
            f"closest marginalized risk {curve.point[idx]:.4g} differs from overall risk "
            f"{overall_risk:.4g} by more than {settings.SCENT_MAX_RELATIVE_GAP:.0%}"
        )
        logger.warning("scent_gap", s=float(curve.grid[idx]), gap=gap, overall_risk=overall_risk)
    return AnchorPoint(s=float(curve.grid[idx]), index=idx, gap=gap, warning=warning)
