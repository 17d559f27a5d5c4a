"""
Cohort summaries and design diagnostics.

- cohort_summary: counts, overall vaccine-arm risk and weighted marker quantiles
- weights_table: per-record stratum, pi_hat and weight
- positivity_report: marker range per covariate stratum vs the pooled range
- confounder_association_table: covariate-outcome and covariate-marker associations
"""

import itertools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

from copsens.dataset.cohort import (
    ARM,
    ID,
    MARKER,
    SAMPLED,
    Y,
    Cohort,
    covariate_groups,
    ordered_levels,
    weighted_quantile,
)
from copsens.dataset.design import TwoPhaseDesign, estimate_sampling_probs
from copsens.platform.config import settings
from copsens.platform.logging import get_logger

if TYPE_CHECKING:
    from copsens.bootstrap.engine import BootstrapPlan

logger = get_logger(__name__)

SUMMARY_QUANTILES = (0.025, 0.05, 0.15, 0.5, 0.85, 0.95, 0.975)


@dataclass(frozen=True)
class CohortSummary:
    """Headline counts of a two-phase trial cohort."""

    n_total: int
    n_vaccine: int
    n_placebo: int
    n_cases_vaccine: int
    n_phase2: int
    overall_vaccine_risk: float
    marker_quantiles: dict[float, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0 <= self.n_phase2 <= self.n_vaccine:
            raise ValueError("n_phase2 must lie in [0, n_vaccine]")
        if not 0.0 <= self.overall_vaccine_risk <= 1.0:
            raise ValueError("overall_vaccine_risk must lie in [0, 1]")

    def to_frame(self) -> pd.DataFrame:
        rows: list[tuple[str, float]] = [
            ("n_total", self.n_total),
            ("n_vaccine", self.n_vaccine),
            ("n_placebo", self.n_placebo),
            ("n_cases_vaccine", self.n_cases_vaccine),
            ("n_phase2", self.n_phase2),
            ("overall_vaccine_risk", self.overall_vaccine_risk),
        ]
        rows += [(f"marker_q{p:g}", v) for p, v in self.marker_quantiles.items()]
        return pd.DataFrame(rows, columns=["quantity", "value"])


def cohort_summary(cohort: Cohort, design: TwoPhaseDesign) -> CohortSummary:
    f = cohort.frame
    vac = f[f[ARM] == 1]
    two = cohort.phase_two().frame
    quantiles: dict[float, float] = {}
    if not two.empty:
        qs = weighted_quantile(two[MARKER], design.weights(two), SUMMARY_QUANTILES)
        quantiles = {p: float(q) for p, q in zip(SUMMARY_QUANTILES, qs, strict=True)}
    return CohortSummary(
        n_total=len(f),
        n_vaccine=len(vac),
        n_placebo=int((f[ARM] == 0).sum()),
        n_cases_vaccine=int(vac[Y].sum()),
        n_phase2=len(two),
        overall_vaccine_risk=float(vac[Y].mean()) if len(vac) else 0.0,
        marker_quantiles=quantiles,
    )


def weights_table(cohort: Cohort, design: TwoPhaseDesign) -> pd.DataFrame:
    """Vaccine-arm records with their stratum, pi_hat and (phase-two) weight."""
    vac = cohort.vaccine().frame
    pi = design.pi_for(vac)
    measured = (vac[SAMPLED] & vac[MARKER].notna()).to_numpy()
    weight = np.where(measured, design.weights(vac), 0.0)
    return pd.DataFrame(
        {
            "id": vac[ID].astype(str),
            "y": vac[Y].astype(int),
            "sampled": measured.astype(int),
            "stratum": design.labels(vac),
            "pi_hat": pi,
            "weight": weight,
        }
    )


# =============================================================================
# POSITIVITY
# =============================================================================


def _marker_stats(values: np.ndarray, weights: np.ndarray) -> dict[str, float]:
    q05, q50, q95 = weighted_quantile(values, weights, [0.05, 0.5, 0.95])
    return {
        "min": float(values.min()),
        "q05": float(q05),
        "q50": float(q50),
        "q95": float(q95),
        "max": float(values.max()),
    }


def positivity_report(
    cohort: Cohort,
    design: TwoPhaseDesign,
    covariates: list[str] | None = None,
    min_coverage: float | None = None,
) -> pd.DataFrame:
    """
    Marker range per covariate stratum of the phase-two vaccine arm.

    A stratum is flagged when its observed marker range covers less than
    ``min_coverage`` of the pooled weighted 5%-95% range. Strata are all
    covariate combinations present in the vaccine arm; those without phase-two
    records are reported with n=0 and no flag. The first row is the pooled
    summary.
    """
    min_coverage = settings.POSITIVITY_MIN_COVERAGE if min_coverage is None else min_coverage
    covariates = list(cohort.covariates) if covariates is None else covariates

    vac = cohort.vaccine()
    two_mask = (vac.frame[SAMPLED] & vac.frame[MARKER].notna()).to_numpy()
    marker = vac.frame[MARKER].to_numpy(dtype=float)
    weights = np.zeros(len(vac))
    weights[two_mask] = design.weights(vac.frame[two_mask])

    if covariates:
        groups = [covariate_groups(vac, c) for c in covariates]
        labels = pd.Series(
            ["|".join(f"{c}={g[i]}" for c, g in zip(covariates, groups, strict=True)) for i in range(len(vac))]
        )
        level_lists = [ordered_levels(vac, c, g) for c, g in zip(covariates, groups, strict=True)]
        strata = [
            "|".join(f"{c}={v}" for c, v in zip(covariates, combo, strict=True))
            for combo in itertools.product(*level_lists)
        ]
        strata = [s for s in strata if (labels == s).any()]
    else:
        labels = pd.Series(["all"] * len(vac))
        strata = ["all"]

    pooled = _marker_stats(marker[two_mask], weights[two_mask])
    span = pooled["q95"] - pooled["q05"]
    rows = [{"stratum": "pooled", "n": int(two_mask.sum()), **pooled, "coverage": np.nan, "flagged": None}]

    for stratum in strata:
        mask = two_mask & (labels == stratum).to_numpy()
        if not mask.any():
            rows.append(
                {"stratum": stratum, "n": 0, "min": np.nan, "q05": np.nan, "q50": np.nan,
                 "q95": np.nan, "max": np.nan, "coverage": np.nan, "flagged": None}
            )
            continue
        stats = _marker_stats(marker[mask], weights[mask])
        overlap = min(stats["max"], pooled["q95"]) - max(stats["min"], pooled["q05"])
        coverage = 1.0 if span <= 0 else max(0.0, overlap) / span
        flagged = coverage < min_coverage
        if flagged:
            logger.warning("positivity_flag", stratum=stratum, coverage=round(coverage, 4))
        rows.append({"stratum": stratum, "n": int(mask.sum()), **stats, "coverage": coverage, "flagged": flagged})

    return pd.DataFrame(rows, columns=["stratum", "n", "min", "q05", "q50", "q95", "max", "coverage", "flagged"])


# =============================================================================
# CONFOUNDER ASSOCIATIONS
# =============================================================================


def _association_estimates(cohort: Cohort, design: TwoPhaseDesign) -> list[dict[str, object]]:
    vac = cohort.vaccine()
    two_mask = (vac.frame[SAMPLED] & vac.frame[MARKER].notna()).to_numpy()
    y = vac.frame[Y].to_numpy(dtype=float)
    marker = vac.frame[MARKER].to_numpy(dtype=float)
    weights = np.zeros(len(vac))
    if two_mask.any():
        weights[two_mask] = design.weights(vac.frame[two_mask])

    rows: list[dict[str, object]] = []
    for name in cohort.covariates:
        groups = covariate_groups(vac, name)
        levels = ordered_levels(vac, name, groups)
        if len(levels) < 2:
            rows.append({"covariate": name, "level": levels[0] if levels else "", "reference": "",
                         "rr_outcome": np.nan, "marker_diff": np.nan, "estimable": False,
                         "note": "not estimable"})
            continue
        ref = levels[0]
        g = groups.to_numpy()
        ref_mask = g == ref
        ref_risk = y[ref_mask].mean()
        ref_two = ref_mask & two_mask
        ref_mean = np.average(marker[ref_two], weights=weights[ref_two]) if ref_two.any() else np.nan
        for level in levels[1:]:
            mask = g == level
            rr = y[mask].mean() / ref_risk if ref_risk > 0 else np.nan
            lvl_two = mask & two_mask
            lvl_mean = np.average(marker[lvl_two], weights=weights[lvl_two]) if lvl_two.any() else np.nan
            rows.append({"covariate": name, "level": level, "reference": ref,
                         "rr_outcome": rr, "marker_diff": lvl_mean - ref_mean,
                         "estimable": bool(np.isfinite(rr) and np.isfinite(lvl_mean - ref_mean)),
                         "note": ""})
    return rows


def confounder_association_table(
    cohort: Cohort,
    design: TwoPhaseDesign,
    plan: "BootstrapPlan | None" = None,
) -> pd.DataFrame:
    """
    Associations of each covariate with the outcome and with the marker.

    Per covariate level (reference = first level): the vaccine-arm outcome risk
    ratio and the weighted difference in mean phase-two marker. With a
    bootstrap plan, percentile CIs are attached.
    """
    rows = _association_estimates(cohort, design)
    table = pd.DataFrame(
        rows, columns=["covariate", "level", "reference", "rr_outcome", "marker_diff", "estimable", "note"]
    )
    table["rr_lo"] = np.nan
    table["rr_hi"] = np.nan
    table["diff_lo"] = np.nan
    table["diff_hi"] = np.nan

    if plan is not None and len(table):
        from copsens.bootstrap.engine import run_bootstrap

        def statistic(rep: Cohort) -> dict[str, np.ndarray]:
            est = _association_estimates(rep, estimate_sampling_probs(rep, design.strata_columns))
            # levels can vanish from a replicate; align on (covariate, level)
            by_key = {(r["covariate"], r["level"]): r for r in est}
            rr = [by_key.get((c, lv), {}).get("rr_outcome", np.nan) for c, lv in zip(table["covariate"], table["level"], strict=True)]
            diff = [by_key.get((c, lv), {}).get("marker_diff", np.nan) for c, lv in zip(table["covariate"], table["level"], strict=True)]
            return {"rr_outcome": np.asarray(rr, dtype=float), "marker_diff": np.asarray(diff, dtype=float)}

        result = run_bootstrap(cohort, design, statistic, plan)
        table["rr_lo"], table["rr_hi"] = result.ci["rr_outcome"]
        table["diff_lo"], table["diff_hi"] = result.ci["marker_diff"]

    return table[["covariate", "level", "reference", "rr_outcome", "rr_lo", "rr_hi",
                  "marker_diff", "diff_lo", "diff_hi", "estimable", "note"]]
