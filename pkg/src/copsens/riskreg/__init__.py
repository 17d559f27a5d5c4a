"""Conditional risk models r(s, x) for the vaccine arm and covariate-only placebo models."""

from copsens.riskreg.cox import breslow_cumhaz, fit_casecohort_cox, fit_cox_frame, partial_loglik_score
from copsens.riskreg.encoding import DesignEncoding, build_encoding
from copsens.riskreg.logistic import fit_logistic_frame, fit_weighted_logistic
from copsens.riskreg.model import Family, RiskModel, predict_many, predict_risk
from copsens.riskreg.newton import ConvergenceInfo

__all__ = [
    "ConvergenceInfo",
    "DesignEncoding",
    "Family",
    "RiskModel",
    "breslow_cumhaz",
    "build_encoding",
    "fit_casecohort_cox",
    "fit_cox_frame",
    "fit_logistic_frame",
    "fit_weighted_logistic",
    "partial_loglik_score",
    "predict_many",
    "predict_risk",
]
