"""
Fitted conditional risk model r(s, x) = P(Y=1 | S=s, A=1, X=x) and its predictions.
"""

from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import pandas as pd
from scipy.special import expit

from copsens.dataset.records import CovariateValue
from copsens.riskreg.encoding import DesignEncoding
from copsens.riskreg.newton import ConvergenceInfo

Family = Literal["weighted-logistic", "case-cohort-cox"]


@dataclass(frozen=True)
class RiskModel:
    """Immutable fitted risk model; safe to share across threads."""

    family: Family
    encoding: DesignEncoding
    beta: np.ndarray
    convergence: ConvergenceInfo
    baseline_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    baseline_cumhaz: np.ndarray = field(default_factory=lambda: np.empty(0))
    t_horizon: float | None = None

    @property
    def coefficients(self) -> dict[str, float]:
        return dict(zip(self.encoding.term_names, map(float, self.beta), strict=True))

    def cumhaz_at(self, t: float) -> float:
        """Weighted Breslow baseline cumulative hazard, zero before the first event."""
        idx = np.searchsorted(self.baseline_times, t, side="right") - 1
        return 0.0 if idx < 0 else float(self.baseline_cumhaz[idx])

    def linear_predictor(self, s: float | np.ndarray | None, frame: pd.DataFrame) -> np.ndarray:
        return self.encoding.matrix(None if s is None else np.asarray(s, dtype=float), frame) @ self.beta


def predict_many(model: RiskModel, s: float | np.ndarray | None, frame: pd.DataFrame) -> np.ndarray:
    """Predicted risks at marker value(s) ``s`` for every covariate row of ``frame``."""
    eta = model.linear_predictor(s, frame)
    if model.family == "weighted-logistic":
        return expit(eta)
    assert model.t_horizon is not None
    h0 = model.cumhaz_at(model.t_horizon)
    return -np.expm1(-h0 * np.exp(eta))


def predict_risk(model: RiskModel, s: float | None, x: Mapping[str, CovariateValue]) -> float:
    """
    Predicted risk r(s, x).

    Raises:
        PredictionError: x has a categorical level unseen at fit time
    """
    frame = pd.DataFrame([dict(x)])
    return float(predict_many(model, s, frame)[0])
