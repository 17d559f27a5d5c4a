"""
Estimator recovery against simulated counterfactual truth.

These run on large simulated trials and are excluded from the default run;
select them with ``pytest -m slow``.
"""

import numpy as np
import pandas as pd
import pytest
from scipy.optimize import brentq

from copsens.bootstrap import BootstrapPlan, run_bootstrap
from copsens.dataset.cohort import MARKER, Cohort, weighted_quantile
from copsens.dataset.design import estimate_sampling_probs
from copsens.cve import placebo_marginalized_risk
from copsens.marginal import default_grid, marginalized_or, marginalized_risk_curve, marginalized_rr
from copsens.pipeline.analysis import run_analysis
from copsens.pipeline.config import AnalysisConfig
from copsens.riskreg.logistic import fit_weighted_logistic
from copsens.riskreg.model import predict_many
from copsens.sensitivity import bias_factor
from copsens.sim import SimScenario, generate_trial, true_placebo_risk, true_rr_c, truth_table

pytestmark = pytest.mark.slow


def simulated_cohort(scenario: SimScenario) -> Cohort:
    name = scenario.covariate.name
    return Cohort.from_records(generate_trial(scenario), covariates=[name], categorical=[name])


def test_marginalized_risk_recovers_controlled_risk(strong_cop):
    scenario = strong_cop.model_copy(update={"n": 50_000})
    cohort = simulated_cohort(scenario)
    design = estimate_sampling_probs(cohort)
    model = fit_weighted_logistic(cohort, design, ["marker", scenario.covariate.name])

    grid = default_grid(cohort, design)
    curve = marginalized_risk_curve(model, cohort, design, grid)
    truth = truth_table(scenario, curve.grid)

    assert np.max(np.abs(curve.point - truth.true_rc)) <= 0.01


def test_confounded_ratio_lies_within_bias_factor(confounded):
    scenario = confounded.model_copy(update={"n": 50_000})
    cohort = simulated_cohort(scenario)
    design = estimate_sampling_probs(cohort)
    model = fit_weighted_logistic(cohort, design, ["marker", scenario.covariate.name])

    two = cohort.phase_two().frame
    s1, s2 = weighted_quantile(two[MARKER].to_numpy(), design.weights(two), [0.15, 0.85])
    rr_m = marginalized_rr(model, cohort, design, float(s1), float(s2))
    b = bias_factor(4.0, 4.0)

    assert rr_m / b <= true_rr_c(scenario, float(s1), float(s2)) <= rr_m * b


def test_strong_correlate_end_to_end(make_analysis_inputs, strong_cop, tmp_path):
    path = make_analysis_inputs(tmp_path / "study", strong_cop, bootstrap={"n_replicates": 50, "seed": 1})
    report = run_analysis(AnalysisConfig.from_json(path), threads=2)

    contrasts = pd.read_csv(tmp_path / "study" / "out" / "contrasts.csv")
    quantile = contrasts[contrasts["contrast"] == "quantile"].set_index("statistic")["estimate"]
    tertile = contrasts[contrasts["contrast"] == "tertile"].set_index("statistic")["estimate"]

    assert quantile["e_point"] > 2.0
    assert tertile["e_point"] > 2.0
    assert quantile["rr_c_bound"] < 1.0
    assert report.cve_cons.point[0] > 0.0
    grid = report.cve_cons.grid
    middle = (grid >= np.quantile(grid, 0.25)) & (grid <= np.quantile(grid, 0.75))
    assert np.all(np.diff(report.cve_cons.point[middle]) > 0)
    assert report.estimates.placebo.estimate == pytest.approx(true_placebo_risk(strong_cop), abs=0.01)
    assert report.bootstrap is not None and report.bootstrap.n_failed <= 2


def test_null_marker_interval_coverage(null_marker):
    covered = 0
    outer = 50
    for i in range(outer):
        scenario = null_marker.model_copy(update={"seed": 1000 + i})
        cohort = simulated_cohort(scenario)
        design = estimate_sampling_probs(cohort)
        two = cohort.phase_two().frame
        s1, s2 = (float(v) for v in weighted_quantile(two[MARKER].to_numpy(), design.weights(two), [0.15, 0.85]))

        def statistic(rep: Cohort, s1: float = s1, s2: float = s2) -> dict[str, float]:
            rep_design = estimate_sampling_probs(rep)
            model = fit_weighted_logistic(rep, rep_design, ["marker", "age_group"])
            return {"rr": marginalized_rr(model, rep, rep_design, s1, s2)}

        result = run_bootstrap(cohort, design, statistic, BootstrapPlan(n_replicates=200, seed=i))
        lo, hi = result.ci["rr"]
        covered += bool(lo[0] <= 1.0 <= hi[0])

    assert covered / outer >= 0.88


def test_controlled_risk_ratio_of_one_quarter(strong_cop):
    def ratio_gap(coef: float) -> float:
        outcome = strong_cop.outcome.model_copy(update={"marker_coef": coef})
        return true_rr_c(strong_cop.model_copy(update={"outcome": outcome}), 1.5, 2.5) - 0.25

    outcome = strong_cop.outcome.model_copy(update={"marker_coef": brentq(ratio_gap, -5.0, 0.0)})
    scenario = strong_cop.model_copy(update={"n": 50_000, "outcome": outcome})
    cohort = simulated_cohort(scenario)
    design = estimate_sampling_probs(cohort)
    model = fit_weighted_logistic(cohort, design, ["marker", scenario.covariate.name])

    assert true_rr_c(scenario, 1.5, 2.5) == pytest.approx(0.25, abs=1e-9)
    assert 0.20 <= marginalized_rr(model, cohort, design, 1.5, 2.5) <= 0.31


def test_rare_outcome_odds_ratio_approximates_risk_ratio(strong_cop):
    outcome = strong_cop.outcome.model_copy(update={"vaccine_intercept": -4.6})
    scenario = strong_cop.model_copy(update={"outcome": outcome})
    cohort = simulated_cohort(scenario)
    design = estimate_sampling_probs(cohort)
    model = fit_weighted_logistic(cohort, design, ["marker", scenario.covariate.name])

    assert cohort.vaccine().frame["y"].mean() < 0.02
    rr = marginalized_rr(model, cohort, design, 1.5, 2.5)
    assert marginalized_or(model, cohort, design, 1.5, 2.5) == pytest.approx(rr, rel=0.05)


def test_average_cve_matches_calibrated_efficacy(strong_cop):
    cohort = simulated_cohort(strong_cop)
    design = estimate_sampling_probs(cohort)
    model = fit_weighted_logistic(cohort, design, ["marker", strong_cop.covariate.name])
    placebo = placebo_marginalized_risk(cohort, "weighted-logistic", [strong_cop.covariate.name])

    two = cohort.phase_two().frame
    w = design.weights(two)
    wn = w / w.sum()
    rm_at_markers = np.array([predict_many(model, s, two) @ wn for s in two[MARKER].to_numpy(dtype=float)])
    average_cve = float(np.average(1.0 - rm_at_markers / placebo.estimate, weights=w))

    assert 0.55 <= average_cve <= 0.75


def test_null_marker_ratio_interval_contains_one(make_analysis_inputs, null_marker, tmp_path):
    path = make_analysis_inputs(tmp_path / "null", null_marker, bootstrap={"n_replicates": 200, "seed": 5})
    run_analysis(AnalysisConfig.from_json(path), threads=2)

    contrasts = pd.read_csv(tmp_path / "null" / "out" / "contrasts.csv")
    rr_m = contrasts[(contrasts["contrast"] == "quantile") & (contrasts["statistic"] == "rr_m")].iloc[0]
    assert rr_m["ci_lo"] <= 1.0 <= rr_m["ci_hi"]


def test_full_mediation_leaves_no_efficacy_at_llod(make_analysis_inputs, full_mediation, tmp_path):
    path = make_analysis_inputs(
        tmp_path / "mediation", full_mediation, llod=0.5, bootstrap={"n_replicates": 200, "seed": 9}
    )
    report = run_analysis(AnalysisConfig.from_json(path), threads=2)

    probe = report.probes["cve_naive"]
    assert probe.s <= full_mediation.marker.llod
    assert abs(probe.cve) <= 0.25
    assert probe.full_mediation_not_rejected is True
    assert report.cve_naive.point[-1] > 0.5
