"""
Unit tests for the inverse-probability-weighted logistic risk model.
"""

import numpy as np
import pandas as pd
import pytest
from scipy.special import expit, logit

from copsens.dataset.design import estimate_sampling_probs
from copsens.platform.errors import CollinearityError, EstimationError, PredictionError
from copsens.riskreg import (
    build_encoding,
    fit_logistic_frame,
    fit_weighted_logistic,
    predict_many,
    predict_risk,
)
from copsens.riskreg.encoding import CovariateEncoding, DesignEncoding
from copsens.riskreg.logistic import logistic_objective
from copsens.riskreg.model import RiskModel
from copsens.riskreg.newton import ConvergenceInfo, standardize

CONVERGED = ConvergenceInfo(iterations=0, score_norm=0.0, loglik=0.0, converged=True)


def two_by_two(a: int, b: int, c: int, d: int) -> tuple[list[float], list[int]]:
    """Marker 1 with a cases and b non-cases, marker 0 with c cases and d non-cases."""
    marker = [1.0] * (a + b) + [0.0] * (c + d)
    y = [1] * a + [0] * b + [1] * c + [0] * d
    return marker, y


def weighted_frame(n: int, seed: int) -> tuple[pd.DataFrame, np.ndarray]:
    rng = np.random.default_rng(seed)
    marker = rng.normal(2.0, 0.5, n)
    age = rng.normal(40.0, 10.0, n)
    y = (rng.random(n) < expit(-0.5 - 0.9 * (marker - 2.0) + 0.02 * (age - 40.0))).astype(int)
    weights = np.where(y == 1, 1.0, rng.choice([2.5, 5.0], size=n))
    return pd.DataFrame({"y": y, "marker": marker, "age": age}), weights


def central_gradient(f, beta: np.ndarray, h: float = 1e-6) -> np.ndarray:
    grad = np.empty_like(beta)
    for j in range(beta.size):
        e = np.zeros_like(beta)
        e[j] = h
        grad[j] = (f(beta + e) - f(beta - e)) / (2.0 * h)
    return grad


class TestFitWeightedLogistic:
    def test_two_by_two_log_odds_ratio(self, make_cohort):
        a, b, c, d = 30, 70, 50, 50
        marker, y = two_by_two(a, b, c, d)
        cohort = make_cohort(arm=[1] * len(y), y=y, marker=marker)
        model = fit_weighted_logistic(cohort, estimate_sampling_probs(cohort), ["marker"])

        assert model.coefficients["marker"] == pytest.approx(np.log(a * d / (b * c)), abs=1e-8)
        assert model.coefficients["(Intercept)"] == pytest.approx(np.log(c / d), abs=1e-8)
        assert model.convergence.converged

    def test_duplication_weight_oracle(self):
        rng = np.random.default_rng(42)
        n = 300
        frame = pd.DataFrame(
            {
                "y": (rng.random(n) < 0.3).astype(int),
                "marker": rng.normal(2.0, 0.5, n),
                "age": rng.normal(40.0, 10.0, n),
            }
        )
        weights = np.where(rng.random(n) < 0.5, 2.0, 1.0)
        encoding = build_encoding(frame, ["marker", "age"], frozenset())
        weighted = fit_logistic_frame(frame, weights, encoding, frame["marker"].to_numpy())

        expanded = frame.loc[frame.index.repeat(weights.astype(int))].reset_index(drop=True)
        duplicated = fit_logistic_frame(
            expanded, np.ones(len(expanded)), encoding, expanded["marker"].to_numpy()
        )

        np.testing.assert_allclose(weighted.beta, duplicated.beta, rtol=0, atol=1e-8)

    def test_categorical_covariate_terms(self, make_cohort):
        rng = np.random.default_rng(3)
        n = 400
        group = np.where(rng.random(n) < 0.5, "child", "teen")
        marker = rng.normal(2.0, 0.5, n)
        y = (rng.random(n) < expit(-1.0 - 0.5 * marker + 0.7 * (group == "teen"))).astype(int)
        cohort = make_cohort(
            arm=[1] * n, y=y, marker=marker, covariates={"age_group": group}, categorical=["age_group"]
        )
        model = fit_weighted_logistic(cohort, estimate_sampling_probs(cohort), ["marker", "age_group"])

        assert list(model.coefficients) == ["(Intercept)", "marker", "age_group[teen]"]

    def test_zero_variance_marker(self, make_cohort):
        cohort = make_cohort(arm=[1] * 6, y=[0, 1, 0, 1, 0, 0], marker=[2.0] * 6)
        with pytest.raises(CollinearityError):
            fit_weighted_logistic(cohort, estimate_sampling_probs(cohort), ["marker"])

    def test_aliased_covariate(self, make_cohort):
        marker, y = two_by_two(10, 20, 15, 15)
        cohort = make_cohort(arm=[1] * len(y), y=y, marker=marker, covariates={"copy": marker})
        with pytest.raises(CollinearityError) as exc:
            fit_weighted_logistic(cohort, estimate_sampling_probs(cohort), ["marker", "copy"])
        assert exc.value.details["aliased"]

    def test_needs_cases_and_non_cases(self, make_cohort):
        cohort = make_cohort(arm=[1] * 4, y=[0] * 4, marker=[1.0, 2.0, 3.0, 4.0])
        with pytest.raises(EstimationError):
            fit_weighted_logistic(cohort, estimate_sampling_probs(cohort), ["marker"])


class TestPredict:
    def test_null_model(self):
        model = RiskModel(
            family="weighted-logistic",
            encoding=DesignEncoding(marker_term=None),
            beta=np.array([logit(0.1)]),
            convergence=CONVERGED,
        )
        assert predict_risk(model, 3.0, {}) == pytest.approx(0.1, abs=1e-12)
        assert predict_risk(model, None, {"age": 10}) == pytest.approx(0.1, abs=1e-12)

    def test_known_coefficients(self):
        encoding = DesignEncoding(
            marker_term="marker",
            covariates=(CovariateEncoding("age_group", "categorical", ("child", "teen")),),
        )
        model = RiskModel("weighted-logistic", encoding, np.array([-1.0, -0.5, 0.3]), CONVERGED)

        assert predict_risk(model, 2.0, {"age_group": "teen"}) == pytest.approx(
            1.0 / (1.0 + np.exp(-(-1.0 - 1.0 + 0.3))), abs=1e-12
        )
        assert predict_risk(model, 2.0, {"age_group": "child"}) == pytest.approx(expit(-2.0), abs=1e-12)

    def test_unseen_level(self):
        encoding = DesignEncoding(
            marker_term=None,
            covariates=(CovariateEncoding("age_group", "categorical", ("child", "teen")),),
        )
        model = RiskModel("weighted-logistic", encoding, np.array([0.0, 0.1]), CONVERGED)
        with pytest.raises(PredictionError) as exc:
            predict_risk(model, None, {"age_group": "adult"})
        assert "adult" in exc.value.message

    def test_tertile_terms(self):
        encoding = DesignEncoding(marker_term="marker_cat")
        model = RiskModel("weighted-logistic", encoding, np.array([-2.0, -0.5, -1.0]), CONVERGED)
        frame = pd.DataFrame(index=range(2))

        assert encoding.term_names == ["(Intercept)", "marker_cat[1]", "marker_cat[2]"]
        np.testing.assert_allclose(predict_many(model, 2.0, frame), expit(-3.0))
        with pytest.raises(PredictionError):
            predict_many(model, 1.5, frame)

    def test_survival_model_before_first_event(self):
        model = RiskModel(
            family="case-cohort-cox",
            encoding=DesignEncoding(marker_term="marker", intercept=False),
            beta=np.array([-1.0]),
            convergence=CONVERGED,
            baseline_times=np.array([10.0, 20.0]),
            baseline_cumhaz=np.array([0.1, 0.3]),
            t_horizon=5.0,
        )
        assert predict_risk(model, 2.0, {}) == 0.0


class TestOptimum:
    def test_finite_difference_gradient_vanishes(self):
        frame, weights = weighted_frame(600, seed=21)
        encoding = build_encoding(frame, ["marker", "age"], frozenset())
        marker = frame["marker"].to_numpy()
        model = fit_logistic_frame(frame, weights, encoding, marker)

        w = weights / weights.mean()
        zs, mean, scale = standardize(encoding.matrix(marker, frame), w, encoding.term_names, intercept=True)
        beta_std = model.beta * scale
        beta_std[0] = model.beta[0] + float(np.sum(model.beta[1:] * mean[1:]))
        objective = logistic_objective(zs, frame["y"].to_numpy(dtype=float), w)

        grad = central_gradient(lambda b: objective(b)[0], beta_std)
        assert np.linalg.norm(grad) <= 1e-5

    @pytest.mark.parametrize("factor", [4.0, 0.37, 1250.0])
    def test_invariant_to_weight_scale(self, factor):
        frame, weights = weighted_frame(500, seed=8)
        encoding = build_encoding(frame, ["marker", "age"], frozenset())
        marker = frame["marker"].to_numpy()

        base = fit_logistic_frame(frame, weights, encoding, marker)
        scaled = fit_logistic_frame(frame, weights * factor, encoding, marker)
        np.testing.assert_allclose(scaled.beta, base.beta, rtol=0, atol=1e-10)

    def test_predicted_risk_decreases_with_negative_marker_coefficient(self):
        frame, weights = weighted_frame(500, seed=4)
        encoding = build_encoding(frame, ["marker", "age"], frozenset())
        model = fit_logistic_frame(frame, weights, encoding, frame["marker"].to_numpy())
        assert model.coefficients["marker"] < 0

        risks = [predict_risk(model, s, {"age": 35.0}) for s in np.linspace(0.5, 3.5, 13)]
        assert np.all(np.diff(risks) < 0)
