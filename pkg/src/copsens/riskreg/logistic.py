"""
Inverse-probability-weighted logistic regression.

Solves sum_i w_i (Y_i - expit(beta'z_i)) z_i = 0 with w_i = 1/pi_hat_i by
Newton-Raphson on a standardized design; coefficients are reported on the
original scale.
"""

from collections.abc import Sequence

import numpy as np
import pandas as pd
from scipy.special import expit

from copsens.dataset.cohort import MARKER, MARKER_CAT, Y, Cohort
from copsens.dataset.design import TwoPhaseDesign
from copsens.platform.errors import EstimationError
from copsens.platform.logging import get_logger
from copsens.riskreg.encoding import DesignEncoding, build_encoding
from copsens.riskreg.model import RiskModel
from copsens.riskreg.newton import Objective, newton_maximize, standardize

logger = get_logger(__name__)


def logistic_objective(zs: np.ndarray, y: np.ndarray, w: np.ndarray) -> Objective:
    """Mean weighted log-likelihood, score and information of a logistic model."""
    n = w.sum()

    def objective(beta: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        eta = zs @ beta
        p = expit(eta)
        ll = float(w @ (y * eta - np.logaddexp(0.0, eta))) / n
        score = zs.T @ (w * (y - p)) / n
        info = (zs * (w * p * (1.0 - p))[:, None]).T @ zs / n
        return ll, score, info

    return objective


def fit_logistic_frame(
    frame: pd.DataFrame,
    weights: np.ndarray,
    encoding: DesignEncoding,
    marker: np.ndarray | None,
) -> RiskModel:
    """Fit a weighted logistic model on prepared data (any arm)."""
    y = frame[Y].to_numpy(dtype=float)
    if y.sum() == 0 or y.sum() == len(y):
        raise EstimationError("logistic fit needs at least one case and one non-case")
    z = encoding.matrix(marker, frame)
    names = encoding.term_names
    w = np.asarray(weights, dtype=float)
    w = w / w.mean()
    zs, mean, scale = standardize(z, w, names, intercept=encoding.intercept)

    beta0 = np.zeros(zs.shape[1])
    if encoding.intercept:
        ybar = float(w @ y / w.sum())
        beta0[0] = np.log(ybar / (1.0 - ybar))
    beta_std, info = newton_maximize(logistic_objective(zs, y, w), beta0, names)

    beta = beta_std / scale
    if encoding.intercept:
        beta[0] = beta_std[0] - float(np.sum(beta_std[1:] * mean[1:] / scale[1:]))
    logger.debug("logistic_fit", iterations=info.iterations, score_norm=info.score_norm)
    return RiskModel(family="weighted-logistic", encoding=encoding, beta=beta, convergence=info)


def fit_weighted_logistic(
    cohort: Cohort, design: TwoPhaseDesign, formula: Sequence[str]
) -> RiskModel:
    """
    Fit r(s, x) on the phase-two vaccine arm by IPW logistic regression.

    Args:
        cohort: Full trial cohort (the phase-two vaccine subset is used)
        design: Estimated two-phase design providing the weights
        formula: Ordered term names, marker term first by convention

    Raises:
        EstimationError: no cases or no non-cases in phase two
        CollinearityError: rank-deficient design
        SeparationError: divergent coefficients
    """
    two = cohort.phase_two().frame
    if two.empty:
        raise EstimationError("empty phase-two set")
    encoding = build_encoding(two, formula, cohort.categorical, intercept=True)
    marker_col = MARKER_CAT if encoding.marker_term == "marker_cat" else MARKER
    marker = two[marker_col].to_numpy(dtype=float) if encoding.marker_term else None
    return fit_logistic_frame(two, design.weights(two), encoding, marker)
