"""
End-to-end correlates analysis.

The grid, contrast pair, sensitivity pair and anchor s_cent are resolved
once on the original data. ``evaluate`` then produces every statistic for a
dataset (the original or a bootstrap replicate): it re-estimates the design,
refits the vaccine and placebo models and recomputes the curves and
contrasts on those fixed quantities so replicate curves align pointwise.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from copsens.bootstrap.engine import BootstrapResult, run_bootstrap
from copsens.cve.efficacy import (
    MediationProbe,
    PlaceboRisk,
    cve_curve,
    cve_frame,
    mediation_probe,
    placebo_marginalized_risk,
)
from copsens.dataset.cohort import MARKER, Cohort, weighted_quantile
from copsens.dataset.design import TwoPhaseDesign, estimate_sampling_probs, tertile_code
from copsens.dataset.diagnostics import (
    cohort_summary,
    confounder_association_table,
    positivity_report,
    weights_table,
)
from copsens.dataset.loader import LoadResult, load_trial_csv
from copsens.dataset.records import TrialSchema
from copsens.marginal.curves import CurveEstimate
from copsens.marginal.risk import (
    AnchorPoint,
    default_grid,
    find_scent,
    marginalized_or,
    marginalized_risk_curve,
    marginalized_rr,
    overall_vaccine_risk,
)
from copsens.pipeline.artifacts import sha256_file, versions, write_csv, write_json
from copsens.pipeline.config import AnalysisConfig
from copsens.platform.errors import ConfigError, NotEvaluableError
from copsens.platform.logging import get_logger, run_context
from copsens.riskreg.cox import fit_casecohort_cox
from copsens.riskreg.logistic import fit_weighted_logistic
from copsens.riskreg.model import Family, RiskModel
from copsens.sensitivity.bounds import SensitivitySpec, bias_at, conservative_risk_curve, rru_surface
from copsens.sensitivity.evalues import EvalueResult, bias_factor, compute_evalues

logger = get_logger(__name__)

TERTILE_GRID = np.array([0.0, 1.0, 2.0])


@dataclass(frozen=True)
class FixedQuantities:
    """Quantities resolved on the original data and held fixed across replicates."""

    family: Family
    covariates: tuple[str, ...]
    strata: tuple[str, ...]
    t_horizon: float | None
    tertile: bool
    grid: np.ndarray
    s1: float
    s2: float
    spec: SensitivitySpec
    scent: float | None = None
    tertile_cuts: tuple[float, float] | None = None
    tertile_ties: str = "lower"


@dataclass
class Estimates:
    design: TwoPhaseDesign
    model: RiskModel
    rm: CurveEstimate
    rc: CurveEstimate
    cve_naive: CurveEstimate
    cve_cons: CurveEstimate
    rr_m: float
    or_m: float
    rr_tertile: float
    placebo: PlaceboRisk
    overall_risk: float

    def statistics(self) -> dict[str, np.ndarray | float]:
        return {
            "rm": self.rm.point,
            "rc_bound": self.rc.point,
            "cve_naive": self.cve_naive.point,
            "cve_cons": self.cve_cons.point,
            "rr_m": self.rr_m,
            "or_m": self.or_m,
            "rr_tertile": self.rr_tertile,
            "placebo_risk": self.placebo.estimate,
        }


@dataclass
class AnalysisReport:
    fixed: FixedQuantities
    anchor: AnchorPoint
    estimates: Estimates
    bootstrap: BootstrapResult | None
    contrasts: pd.DataFrame
    evalues: dict[str, EvalueResult] = field(default_factory=dict)
    probes: dict[str, MediationProbe] = field(default_factory=dict)
    rm: CurveEstimate | None = None
    rc: CurveEstimate | None = None
    cve_naive: CurveEstimate | None = None
    cve_cons: CurveEstimate | None = None


# =============================================================================
# MODEL FITTING
# =============================================================================


def fit_risk_model(
    cohort: Cohort,
    design: TwoPhaseDesign,
    family: Family,
    formula: Sequence[str],
    t_horizon: float | None,
) -> RiskModel:
    if family == "weighted-logistic":
        return fit_weighted_logistic(cohort, design, formula)
    if t_horizon is None:
        raise ConfigError("the cox family needs t_horizon")
    return fit_casecohort_cox(cohort, design, formula, t_horizon)


def _fit_marker_model(
    cohort: Cohort, design: TwoPhaseDesign, fixed: FixedQuantities, tertile: bool
) -> tuple[Cohort, RiskModel]:
    fit_cohort = tertile_code(cohort, design).cohort if tertile else cohort
    term = "marker_cat" if tertile else "marker"
    model = fit_risk_model(fit_cohort, design, fixed.family, [term, *fixed.covariates], fixed.t_horizon)
    return fit_cohort, model


def evaluate(cohort: Cohort, fixed: FixedQuantities) -> Estimates:
    """Every statistic of the analysis on one dataset."""
    if fixed.scent is None:
        raise ValueError("anchor must be resolved before evaluation")
    design = estimate_sampling_probs(cohort, fixed.strata)
    fit_cohort, model = _fit_marker_model(cohort, design, fixed, fixed.tertile)

    rm = marginalized_risk_curve(model, fit_cohort, design, fixed.grid, check_support=False)
    rc = conservative_risk_curve(rm, fixed.scent, fixed.spec)
    placebo = placebo_marginalized_risk(cohort, fixed.family, fixed.covariates, fixed.t_horizon)

    rr_m = marginalized_rr(model, fit_cohort, design, fixed.s1, fixed.s2)
    or_m = marginalized_or(model, fit_cohort, design, fixed.s1, fixed.s2)
    if fixed.tertile:
        rr_tertile = rr_m
    else:
        tert_cohort, tert_model = _fit_marker_model(cohort, design, fixed, tertile=True)
        rr_tertile = marginalized_rr(tert_model, tert_cohort, design, 0.0, 2.0)

    return Estimates(
        design=design,
        model=model,
        rm=rm,
        rc=rc,
        cve_naive=cve_curve(rm, placebo),
        cve_cons=cve_curve(rc, placebo),
        rr_m=rr_m,
        or_m=or_m,
        rr_tertile=rr_tertile,
        placebo=placebo,
        overall_risk=overall_vaccine_risk(cohort),
    )


def resolve_fixed(
    cohort: Cohort,
    config: AnalysisConfig,
    covariates: Sequence[str],
    strata: Sequence[str],
) -> tuple[FixedQuantities, AnchorPoint]:
    """Grid, contrast pair, sensitivity spec and anchor on the original data."""
    design = estimate_sampling_probs(cohort, strata)
    two = cohort.phase_two().frame
    markers = two[MARKER].to_numpy(dtype=float)
    weights = design.weights(two)
    tertile = config.marker_mode == "tertile"
    sens = config.sensitivity

    if tertile:
        grid = TERTILE_GRID
        s1, s2 = 0.0, 2.0
        spec = SensitivitySpec(rr_ud_fix=sens.rr_u_fix, rr_eu_fix=sens.rr_u_fix, s1_fix=0.0, s2_fix=2.0)
    else:
        if config.grid.values is not None:
            grid = np.asarray(config.grid.values, dtype=float)
        else:
            grid = default_grid(cohort, design, config.grid.points, config.grid.lo_quantile, config.grid.hi_quantile)
        s1, s2 = (float(v) for v in weighted_quantile(markers, weights, config.contrast_quantiles))
        if sens.s1_fix is not None and sens.s2_fix is not None:
            spec = SensitivitySpec(rr_ud_fix=sens.rr_u_fix, rr_eu_fix=sens.rr_u_fix, s1_fix=sens.s1_fix, s2_fix=sens.s2_fix)
        else:
            spec = SensitivitySpec.from_quantiles(
                sens.rr_u_fix, sens.s1_fix_quantile, sens.s2_fix_quantile, markers, weights
            )

    fixed = FixedQuantities(
        family=config.risk_family,
        covariates=tuple(covariates),
        strata=tuple(strata),
        t_horizon=cohort.t_horizon,
        tertile=tertile,
        grid=grid,
        s1=s1,
        s2=s2,
        spec=spec,
    )
    coding = tertile_code(cohort, design)
    fit_cohort, model = _fit_marker_model(cohort, design, fixed, tertile)
    rm = marginalized_risk_curve(model, fit_cohort, design, grid)
    anchor = find_scent(rm, overall_vaccine_risk(cohort))
    logger.info("anchor_resolved", scent=anchor.s, gap=anchor.gap, grid_points=int(rm.grid.size))
    resolved = replace(fixed, grid=rm.grid, scent=anchor.s, tertile_cuts=coding.cuts, tertile_ties=coding.ties)
    return resolved, anchor


# =============================================================================
# CONTRASTS
# =============================================================================


def _ci(boot: BootstrapResult | None, name: str, j: int = 0) -> tuple[float, float]:
    if boot is None or name not in boot.ci:
        return float("nan"), float("nan")
    lo, hi = boot.ci[name]
    return float(lo[j]), float(hi[j])


def _evalue_rows(
    label: str, s1: float, s2: float, rr: float, lo: float, hi: float
) -> tuple[list[dict[str, Any]], EvalueResult]:
    limit = hi if rr <= 1.0 else lo
    result = compute_evalues(rr, limit if np.isfinite(limit) else None)
    note = "reciprocal" if result.reciprocal else ""
    rows = [{"contrast": label, "statistic": "e_point", "s1": s1, "s2": s2,
             "estimate": result.e_point, "ci_lo": np.nan, "ci_hi": np.nan, "note": note}]
    if result.e_ul is not None:
        rows.append({"contrast": label, "statistic": "e_ul", "s1": s1, "s2": s2,
                     "estimate": result.e_ul, "ci_lo": np.nan, "ci_hi": np.nan, "note": note})
    return rows, result


def contrasts_table(
    est: Estimates, fixed: FixedQuantities, boot: BootstrapResult | None, anchor: AnchorPoint
) -> tuple[pd.DataFrame, dict[str, EvalueResult]]:
    rows: list[dict[str, Any]] = []
    evalues: dict[str, EvalueResult] = {}

    def add(contrast: str, statistic: str, s1: float, s2: float, estimate: float,
            lo: float = np.nan, hi: float = np.nan, note: str = "") -> None:
        rows.append({"contrast": contrast, "statistic": statistic, "s1": s1, "s2": s2,
                     "estimate": estimate, "ci_lo": lo, "ci_hi": hi, "note": note})

    label = "tertile" if fixed.tertile else "quantile"
    rr_lo, rr_hi = _ci(boot, "rr_m")
    add(label, "rr_m", fixed.s1, fixed.s2, est.rr_m, rr_lo, rr_hi)
    add(label, "or_m", fixed.s1, fixed.s2, est.or_m, *_ci(boot, "or_m"))
    b = bias_at(fixed.spec, fixed.s1, fixed.s2)
    add(label, "bias_factor", fixed.s1, fixed.s2, b)
    add(label, "rr_c_bound", fixed.s1, fixed.s2, est.rr_m * b, rr_lo * b, rr_hi * b)
    ev_rows, evalues[label] = _evalue_rows(label, fixed.s1, fixed.s2, est.rr_m, rr_lo, rr_hi)
    rows += ev_rows

    if not fixed.tertile:
        t_lo, t_hi = _ci(boot, "rr_tertile")
        b_t = bias_factor(fixed.spec.rr_ud_fix, fixed.spec.rr_eu_fix)
        add("tertile", "rr_m", 0.0, 2.0, est.rr_tertile, t_lo, t_hi)
        add("tertile", "bias_factor", 0.0, 2.0, b_t)
        add("tertile", "rr_c_bound", 0.0, 2.0, est.rr_tertile * b_t, t_lo * b_t, t_hi * b_t)
        ev_rows, evalues["tertile"] = _evalue_rows("tertile", 0.0, 2.0, est.rr_tertile, t_lo, t_hi)
        rows += ev_rows

    add("overall", "placebo_risk", np.nan, np.nan, est.placebo.estimate, *_ci(boot, "placebo_risk"))
    add("overall", "vaccine_risk", np.nan, np.nan, est.overall_risk)
    add("overall", "scent", anchor.s, np.nan, est.rm.point[anchor.index], note=anchor.warning or "")

    return pd.DataFrame(rows, columns=["contrast", "statistic", "s1", "s2", "estimate", "ci_lo", "ci_hi", "note"]), evalues


# =============================================================================
# RUN
# =============================================================================


def load_cohort(config: AnalysisConfig) -> tuple[LoadResult, Cohort]:
    schema = TrialSchema.from_json(config.schema_file)
    if config.t_horizon is not None:
        schema = schema.model_copy(update={"t_horizon": config.t_horizon})
    if config.family == "cox" and not schema.has_survival:
        raise ConfigError("the cox family needs time and event columns in the schema")
    loaded = load_trial_csv(config.trial, schema)
    return loaded, loaded.to_cohort()


def run_analysis(
    config: AnalysisConfig,
    threads: int | None = None,
    keep_replicates: bool = False,
) -> AnalysisReport:
    """Run the full analysis and write every artifact under ``config.output_dir``."""
    with run_context(config.digest()[:16], command="analyze"):
        return _analyze(config, threads, keep_replicates)


def _analyze(config: AnalysisConfig, threads: int | None, keep_replicates: bool) -> AnalysisReport:
    loaded, cohort = load_cohort(config)
    covariates = config.covariates if config.covariates is not None else loaded.schema.covariates
    strata = config.design_strata if config.design_strata is not None else loaded.schema.design_strata
    out = Path(config.output_dir)

    fixed, anchor = resolve_fixed(cohort, config, covariates, strata)
    est = evaluate(cohort, fixed)

    boot = run_bootstrap(
        cohort,
        est.design,
        lambda rep: evaluate(rep, fixed).statistics(),
        config.bootstrap,
        threads=threads,
    )
    meta = {"scent": fixed.scent, "sensitivity_spec": fixed.spec.digest(), "replicates": boot.n_success}

    rm = est.rm.with_ci(*boot.ci["rm"], **meta)
    rc = est.rc.with_ci(*boot.ci["rc_bound"], **meta)
    cve_naive = est.cve_naive.with_ci(*boot.ci["cve_naive"], **meta)
    cve_cons = est.cve_cons.with_ci(*boot.ci["cve_cons"], **meta)

    contrasts, evalues = contrasts_table(est, fixed, boot, anchor)
    probes: dict[str, MediationProbe] = {}
    if config.llod is not None and fixed.tertile:
        # LLOD is on the marker scale; tertile codes are not
        logger.warning(
            "mediation_not_evaluable", curve="all", reason="marker is tertile-coded", llod=config.llod
        )
    elif config.llod is not None:
        extra = []
        for name, curve in (("cve_naive", cve_naive), ("cve_cons", cve_cons)):
            try:
                probe = mediation_probe(curve, config.llod)
            except NotEvaluableError as exc:
                logger.warning("mediation_not_evaluable", curve=name, reason=exc.message)
                continue
            probes[name] = probe
            flag = probe.full_mediation_not_rejected
            extra.append({"contrast": "mediation", "statistic": f"{name}_at_llod", "s1": probe.s, "s2": np.nan,
                          "estimate": probe.cve, "ci_lo": probe.ci_lo, "ci_hi": probe.ci_hi,
                          "note": "" if flag is None else ("full mediation not rejected" if flag else "full mediation rejected")})
        if extra:
            contrasts = pd.concat([contrasts, pd.DataFrame(extra)], ignore_index=True)

    report = AnalysisReport(
        fixed=fixed, anchor=anchor, estimates=est, bootstrap=boot, contrasts=contrasts,
        evalues=evalues, probes=probes, rm=rm, rc=rc, cve_naive=cve_naive, cve_cons=cve_cons,
    )
    write_outputs(report, config, loaded, cohort, out, keep_replicates)
    return report


def write_outputs(
    report: AnalysisReport,
    config: AnalysisConfig,
    loaded: LoadResult,
    cohort: Cohort,
    out: Path,
    keep_replicates: bool,
) -> None:
    est, fixed = report.estimates, report.fixed
    assert report.rm and report.rc and report.cve_naive and report.cve_cons
    design = est.design
    written: dict[str, Path] = {}

    def put(name: str, frame: pd.DataFrame) -> None:
        written[name] = write_csv(frame, out / name)

    put("cohort_summary.csv", cohort_summary(cohort, design).to_frame())
    put("weights.csv", weights_table(cohort, design))
    put("positivity.csv", positivity_report(cohort, design, list(fixed.covariates)))
    plan = config.bootstrap if config.confounder_ci else None
    put("confounder_table.csv", confounder_association_table(cohort, design, plan))
    put("curve_rm.csv", report.rm.to_frame())
    put("curve_rc_bound.csv", report.rc.to_frame())
    llod = None if fixed.tertile else config.llod
    put("curve_cve_naive.csv", cve_frame(report.cve_naive, llod))
    put("curve_cve_cons.csv", cve_frame(report.cve_cons, llod))
    put("contrasts.csv", report.contrasts)
    put("surface_rru.csv", rru_surface(fixed.spec, fixed.grid))
    if loaded.errors:
        put("row_errors.csv", loaded.errors_frame())
    if keep_replicates and report.bootstrap is not None:
        for path in report.bootstrap.write_replicates(out / "replicates"):
            written[f"replicates/{path.name}"] = path

    boot = report.bootstrap
    manifest = {
        "config_digest": config.digest(),
        "config": config.model_dump(mode="json", by_alias=True),
        "inputs": {
            "trial": {"path": str(config.trial), "sha256": sha256_file(config.trial)},
            "schema": {"path": str(config.schema_file), "sha256": sha256_file(config.schema_file)},
        },
        "seed": config.bootstrap.seed,
        "bootstrap": {
            "replicates": config.bootstrap.n_replicates,
            "failed": boot.n_failed if boot else 0,
        },
        "anchor": {"scent": report.anchor.s, "gap": report.anchor.gap, "warning": report.anchor.warning},
        "tertiles": {
            "cuts": list(fixed.tertile_cuts) if fixed.tertile_cuts is not None else None,
            "ties": fixed.tertile_ties,
        },
        "rows_rejected": len(loaded.errors),
        "versions": versions(),
        "outputs": {name: sha256_file(path) for name, path in sorted(written.items())},
    }
    write_json(manifest, out / "run_manifest.json")
    logger.info("analysis_written", output_dir=str(out), files=len(written) + 1)
