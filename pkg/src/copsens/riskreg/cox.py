"""
Case-cohort Cox regression.

beta maximizes the weighted Cox partial likelihood in which every phase-two
participant enters the risk sets with weight 1/pi_hat (cases have weight 1,
so they are always in their own risk set). Ties use the Breslow
approximation. The baseline cumulative hazard is the weighted Breslow
estimator, and the predicted risk at the horizon is
r(s, x) = 1 - exp(-Lambda0(t_horizon) * exp(beta'z(s, x))).
"""

from collections.abc import Sequence

import numpy as np
import pandas as pd

from copsens.dataset.cohort import EVENT, MARKER, MARKER_CAT, TIME, Cohort
from copsens.dataset.design import TwoPhaseDesign
from copsens.platform.errors import EstimationError, NoInformationError
from copsens.platform.logging import get_logger
from copsens.riskreg.encoding import DesignEncoding, build_encoding
from copsens.riskreg.model import RiskModel
from copsens.riskreg.newton import ConvergenceInfo, Objective, newton_maximize, standardize

logger = get_logger(__name__)


def _risk_set_start(sorted_times: np.ndarray) -> np.ndarray:
    """Index of the first subject whose time equals each subject's time (ties share a risk set)."""
    return np.searchsorted(sorted_times, sorted_times, side="left")


def breslow_cumhaz(
    time: np.ndarray,
    event: np.ndarray,
    weights: np.ndarray,
    eta: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Weighted Breslow baseline cumulative hazard.

    dLambda0(t_k) = sum_{events at t_k} w_i / sum_{j: T_j >= t_k} w_j exp(eta_j).
    With eta = 0 this is the weighted Nelson-Aalen estimator.

    Returns:
        (distinct event times, cumulative hazard at those times)
    """
    order = np.argsort(time, kind="mergesort")
    t, d, w, e = time[order], event[order].astype(bool), weights[order], eta[order]
    risk = np.cumsum((w * np.exp(e))[::-1])[::-1]
    event_times = np.unique(t[d])
    if event_times.size == 0:
        return event_times, np.empty(0)
    start = np.searchsorted(t, event_times, side="left")
    d_w = np.array([w[d & (t == tk)].sum() for tk in event_times])
    return event_times, np.cumsum(d_w / risk[start])


def partial_likelihood_objective(
    time: np.ndarray, event: np.ndarray, zs: np.ndarray, w: np.ndarray
) -> Objective:
    """Mean weighted Breslow partial log-likelihood, score and information."""
    order = np.argsort(time, kind="mergesort")
    t, d, z, ww = time[order], event[order].astype(bool), zs[order], w[order]
    start = _risk_set_start(t)[d]
    z_ev, w_ev = z[d], ww[d]
    n = ww.sum()
    p = z.shape[1]

    def objective(beta: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        eta = z @ beta
        shift = eta.max() if eta.size else 0.0
        r = ww * np.exp(eta - shift)
        s0 = np.cumsum(r[::-1])[::-1][start]
        s1 = np.cumsum((r[:, None] * z)[::-1], axis=0)[::-1][start]
        s2 = np.cumsum((r[:, None, None] * z[:, :, None] * z[:, None, :])[::-1], axis=0)[::-1][start]
        zbar = s1 / s0[:, None]
        ll = float(w_ev @ (eta[d] - shift - np.log(s0))) / n
        score = ((z_ev - zbar) * w_ev[:, None]).sum(axis=0) / n
        cov = s2 / s0[:, None, None] - zbar[:, :, None] * zbar[:, None, :]
        info = (cov * w_ev[:, None, None]).sum(axis=0) / n if p else np.empty((0, 0))
        return ll, score, info

    return objective


def fit_cox_frame(
    frame: pd.DataFrame,
    weights: np.ndarray,
    encoding: DesignEncoding,
    marker: np.ndarray | None,
    t_horizon: float,
) -> RiskModel:
    """Fit a weighted Cox model on prepared data (any arm)."""
    time = frame[TIME].to_numpy(dtype=float)
    if np.isnan(time).any():
        raise EstimationError("Cox fit needs follow-up times for every record")
    # events after the horizon count as censored there
    event = (frame[EVENT].to_numpy(dtype=float) == 1) & (time <= t_horizon)
    if not event.any():
        raise NoInformationError(f"no events before t_horizon={t_horizon:g}")

    w = np.asarray(weights, dtype=float)
    w = w / w.mean()
    z = encoding.matrix(marker, frame)
    names = encoding.term_names

    if z.shape[1] == 0:
        beta = np.empty(0)
        info = ConvergenceInfo(iterations=0, score_norm=0.0, loglik=float("nan"), converged=True)
    else:
        zs, _, scale = standardize(z, w, names, intercept=False)
        beta_std, info = newton_maximize(
            partial_likelihood_objective(time, event, zs, w), np.zeros(zs.shape[1]), names
        )
        beta = beta_std / scale

    times, cumhaz = breslow_cumhaz(time, event, w, z @ beta if beta.size else np.zeros(len(time)))
    logger.debug("cox_fit", iterations=info.iterations, events=int(event.sum()))
    return RiskModel(
        family="case-cohort-cox",
        encoding=encoding,
        beta=beta,
        convergence=info,
        baseline_times=times,
        baseline_cumhaz=cumhaz,
        t_horizon=t_horizon,
    )


def fit_casecohort_cox(
    cohort: Cohort,
    design: TwoPhaseDesign,
    formula: Sequence[str],
    t_horizon: float,
) -> RiskModel:
    """
    Fit the case-cohort Cox model on the phase-two vaccine arm.

    Raises:
        NoInformationError: no events before t_horizon
        ConvergenceError: Newton iterations did not converge
        CollinearityError: rank-deficient design
    """
    two = cohort.phase_two().frame
    if two.empty:
        raise EstimationError("empty phase-two set")
    encoding = build_encoding(two, formula, cohort.categorical, intercept=False)
    marker_col = MARKER_CAT if encoding.marker_term == "marker_cat" else MARKER
    marker = two[marker_col].to_numpy(dtype=float) if encoding.marker_term else None
    return fit_cox_frame(two, design.weights(two), encoding, marker, t_horizon)


def partial_loglik_score(
    time: np.ndarray,
    event: np.ndarray,
    z: np.ndarray,
    weights: np.ndarray,
    beta: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Weighted Breslow partial log-likelihood and score at ``beta`` on the given scale (sums, not means)."""
    w = np.asarray(weights, dtype=float)
    ll, score, _ = partial_likelihood_objective(time, np.asarray(event, dtype=bool), z, w)(
        np.asarray(beta, dtype=float)
    )
    return ll * w.sum(), score * w.sum()
