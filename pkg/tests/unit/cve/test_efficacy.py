"""
Unit tests for controlled vaccine efficacy curves and the mediation probe.
"""

import numpy as np
import pytest

from copsens.cve import (
    PlaceboRisk,
    cve_curve,
    cve_frame,
    mediation_probe,
    placebo_marginalized_risk,
    write_cve_csv,
)
from copsens.marginal.curves import CurveEstimate, CurveKind
from copsens.platform.errors import NonEstimableError, NotEvaluableError
from copsens.sensitivity import SensitivitySpec, conservative_risk_curve

GRID = np.array([0.0, 0.5, 1.0, 1.5])


def risk_curve(point, kind=CurveKind.MARGINALIZED_RISK, **bands) -> CurveEstimate:
    return CurveEstimate(GRID, np.asarray(point, dtype=float), kind, **bands)


class TestPlaceboRisk:
    def test_intercept_only_logistic_is_empirical_risk(self, make_cohort):
        cohort = make_cohort(arm=[0] * 10 + [1] * 2, y=[1, 1, 1] + [0] * 7 + [0, 1], sampled=[0] * 12)
        placebo = placebo_marginalized_risk(cohort, "weighted-logistic", [])

        assert placebo.estimate == pytest.approx(0.3, abs=1e-8)
        assert placebo.n_at_risk == 10

    def test_intercept_only_cox_is_nelson_aalen_risk(self, make_cohort):
        time = [5.0, 10.0, 20.0, 30.0, 40.0, 50.0]
        event = [1, 0, 1, 0, 0, 0]
        cohort = make_cohort(
            arm=[0] * 6, y=event, sampled=[0] * 6, time=time, event=event, t_horizon=45.0
        )
        placebo = placebo_marginalized_risk(cohort, "case-cohort-cox", [], t_horizon=45.0)

        assert placebo.estimate == pytest.approx(1.0 - np.exp(-(1 / 6 + 1 / 4)), abs=1e-12)

    def test_covariate_standardization(self, make_cohort):
        group = ["a"] * 50 + ["b"] * 50
        y = [1] * 5 + [0] * 45 + [1] * 15 + [0] * 35
        cohort = make_cohort(
            arm=[0] * 100, y=y, sampled=[0] * 100, covariates={"group": group}, categorical=["group"]
        )
        placebo = placebo_marginalized_risk(cohort, "weighted-logistic", ["group"])

        assert placebo.estimate == pytest.approx(0.2, abs=1e-7)

    def test_no_placebo_events(self, make_cohort):
        cohort = make_cohort(arm=[0] * 5, y=[0] * 5, sampled=[0] * 5)
        with pytest.raises(NonEstimableError):
            placebo_marginalized_risk(cohort, "weighted-logistic", [])

    def test_survival_and_binary_families_agree_without_censoring(self, make_cohort):
        rng = np.random.default_rng(8)
        n = 4000
        t_event = rng.exponential(365.0 / 0.03, n)
        event = (t_event <= 365.0).astype(int)
        cohort = make_cohort(
            arm=[0] * n, y=event, sampled=[0] * n, time=np.minimum(t_event, 365.0), event=event, t_horizon=365.0
        )
        binary = placebo_marginalized_risk(cohort, "weighted-logistic", [])
        survival = placebo_marginalized_risk(cohort, "case-cohort-cox", [], t_horizon=365.0)

        assert survival.estimate == pytest.approx(binary.estimate, rel=0.02)


class TestCveCurve:
    def test_null_vaccine(self):
        curve = cve_curve(risk_curve([0.04] * 4), 0.04)
        np.testing.assert_allclose(curve.point, 0.0, atol=1e-15)
        assert curve.kind is CurveKind.CVE_NAIVE
        assert curve.meta["placebo_risk"] == 0.04

    def test_zero_risk_gives_full_efficacy(self):
        curve = cve_curve(risk_curve([0.04, 0.02, 0.01, 0.0]), 0.04)
        assert curve.point[-1] == 1.0

    def test_conservative_kind(self):
        curve = cve_curve(risk_curve([0.04] * 4, CurveKind.CONTROLLED_RISK_BOUND), 0.05)
        assert curve.kind is CurveKind.CVE_CONSERVATIVE

    def test_ratio_identity(self):
        risk = risk_curve([0.05, 0.031, 0.022, 0.011])
        cve = cve_curve(risk, 0.0712)
        for i in range(4):
            for j in range(i + 1, 4):
                ratio = (1.0 - cve.point[j]) / (1.0 - cve.point[i])
                assert ratio == pytest.approx(risk.point[j] / risk.point[i], rel=1e-12)

    def test_bands_are_not_carried(self):
        risk = risk_curve([0.04] * 4, ci_lo=np.full(4, 0.03), ci_hi=np.full(4, 0.05))
        assert not cve_curve(risk, 0.05).has_ci

    def test_conservative_curve_is_flatter_about_the_anchor(self):
        grid = np.linspace(0.0, 1.0, 9)
        risk = CurveEstimate(grid, np.linspace(0.05, 0.01, 9), CurveKind.MARGINALIZED_RISK)
        spec = SensitivitySpec(rr_ud_fix=4.0, rr_eu_fix=4.0, s1_fix=0.0, s2_fix=1.0)
        naive = cve_curve(risk, 0.06)
        cons = cve_curve(conservative_risk_curve(risk, grid[4], spec), 0.06)

        naive_gap = np.abs(naive.point - naive.point[4])
        cons_gap = np.abs(cons.point - cons.point[4])
        assert np.all(cons_gap <= naive_gap + 1e-15)
        assert np.all(cons_gap[[0, 8]] < naive_gap[[0, 8]])

    def test_zero_placebo_risk(self):
        with pytest.raises(NonEstimableError):
            cve_curve(risk_curve([0.04] * 4), 0.0)
        with pytest.raises(NonEstimableError):
            PlaceboRisk(estimate=0.0, model=None, n_at_risk=0)  # type: ignore[arg-type]


class TestMediationProbe:
    def cve(self, lo: float, hi: float) -> CurveEstimate:
        return CurveEstimate(
            GRID, np.array([0.05, 0.4, 0.6, 0.7]), CurveKind.CVE_NAIVE,
            ci_lo=np.array([lo, 0.2, 0.4, 0.5]), ci_hi=np.array([hi, 0.6, 0.8, 0.9]),
        )

    def test_ci_containing_zero(self):
        probe = mediation_probe(self.cve(-0.1, 0.2), llod=0.2)
        assert probe.s == 0.0
        assert probe.full_mediation_not_rejected is True

    def test_ci_excluding_zero(self):
        curve = CurveEstimate(
            GRID, np.array([0.25, 0.4, 0.6, 0.7]), CurveKind.CVE_NAIVE,
            ci_lo=np.array([0.15, 0.2, 0.4, 0.5]), ci_hi=np.array([0.4, 0.6, 0.8, 0.9]),
        )
        assert mediation_probe(curve, llod=0.7).full_mediation_not_rejected is False

    def test_without_ci(self):
        curve = CurveEstimate(GRID, np.array([0.05, 0.4, 0.6, 0.7]), CurveKind.CVE_NAIVE)
        assert mediation_probe(curve, llod=0.0).full_mediation_not_rejected is None

    def test_no_grid_point_below_llod(self):
        with pytest.raises(NotEvaluableError):
            mediation_probe(self.cve(-0.1, 0.2), llod=-1.0)


def test_cve_csv_layout(tmp_path):
    curve = cve_curve(risk_curve([0.04, 0.03, 0.02, 0.01]), 0.05)
    frame = cve_frame(curve, llod=0.5)

    assert list(frame.columns) == ["s", "cve", "ci_lo", "ci_hi", "kind", "llod_flag"]
    assert frame["llod_flag"].tolist() == [True, True, False, False]

    write_cve_csv(curve, tmp_path / "cve.csv")
    assert (tmp_path / "cve.csv").read_text().startswith("s,cve,ci_lo,ci_hi,kind,llod_flag\n")
