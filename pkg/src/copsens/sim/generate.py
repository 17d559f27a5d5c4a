"""
Synthetic two-arm case-cohort trials.

All draws come from one generator seeded by ``SeedSequence(scenario.seed)``
in a fixed order (X, U, arm, marker, outcome, sampling), so a scenario
reproduces bit-exactly. U never reaches the output.
"""

import numpy as np
import pandas as pd

from copsens.dataset.records import ParticipantRecord, SurvivalOutcome, TrialSchema
from copsens.platform.logging import get_logger
from copsens.sim.scenario import SimScenario

logger = get_logger(__name__)


def placebo_sentinel(scenario: SimScenario) -> float | None:
    """Marker value written for sampled placebo recipients (half the LLOD)."""
    llod = scenario.marker.llod
    return None if llod is None else llod - float(np.log10(2.0))


def generate_frame(scenario: SimScenario) -> pd.DataFrame:
    """Generated trial in the CSV layout described by ``trial_schema``."""
    rng = np.random.default_rng(np.random.SeedSequence(scenario.seed))
    n = scenario.n
    cov = scenario.covariate

    x = rng.choice(len(cov.levels), size=n, p=np.asarray(cov.probs) / np.sum(cov.probs))
    u = (rng.random(n) < scenario.u_prob()[x]).astype(int)
    arm = (rng.random(n) < scenario.vaccine_fraction).astype(int)
    s = scenario.marker_mean(x, u) + scenario.marker.sd * rng.standard_normal(n)
    sentinel = placebo_sentinel(scenario)
    if scenario.marker.nonresponder_fraction > 0:
        assert sentinel is not None
        nonresponder = (arm == 1) & (rng.random(n) < scenario.marker.nonresponder_fraction)
        s = np.where(nonresponder, round(sentinel, 6), s)

    risk = np.where(arm == 1, scenario.vaccine_risk(s, x, u), scenario.placebo_risk(x, u))
    draw = rng.random(n)
    sampled_draw = rng.random(n)

    frame = pd.DataFrame(
        {
            "id": [f"P{i:06d}" for i in range(1, n + 1)],
            "arm": arm,
            cov.name: np.asarray(cov.levels, dtype=object)[x],
        }
    )
    t_h = scenario.outcome.t_horizon
    if scenario.outcome.family == "survival":
        # exponential event times with P(T <= t_h) = risk, censored at t_h
        rate = -np.log1p(-risk) / t_h
        t_event = -np.log1p(-draw) / rate
        y = t_event <= t_h
        frame["time"] = np.round(np.minimum(t_event, t_h), 6)
        frame["event"] = y.astype(int)
    else:
        y = draw < risk
        frame["y"] = y.astype(int)

    sampled = y | (sampled_draw < scenario.subsample_rate)
    frame["sampled"] = sampled.astype(int)
    marker = np.where(sampled & (arm == 1), np.round(s, 6), np.nan)
    if sentinel is not None:
        marker = np.where(sampled & (arm == 0), round(sentinel, 6), marker)
    frame["marker"] = marker

    logger.info(
        "trial_generated",
        scenario=scenario.name,
        n=n,
        vaccine=int(arm.sum()),
        cases=int(y.sum()),
        sampled=int(sampled.sum()),
    )
    return frame


def trial_schema(scenario: SimScenario) -> TrialSchema:
    """Column mapping of ``generate_frame`` output for the loader."""
    name = scenario.covariate.name
    if scenario.outcome.family == "survival":
        return TrialSchema(
            outcome=None,
            time="time",
            event="event",
            covariates=[name],
            categorical=[name],
            t_horizon=scenario.outcome.t_horizon,
        )
    return TrialSchema(covariates=[name], categorical=[name])


def generate_trial(scenario: SimScenario) -> list[ParticipantRecord]:
    """Generated trial as participant records."""
    frame = generate_frame(scenario)
    name = scenario.covariate.name
    survival = scenario.outcome.family == "survival"
    records = []
    for row in frame.to_dict("records"):
        marker = None if pd.isna(row["marker"]) else float(row["marker"])
        records.append(
            ParticipantRecord(
                id=row["id"],
                arm=int(row["arm"]),  # type: ignore[arg-type]
                covariates={name: str(row[name])},
                marker=marker,
                sampled=bool(row["sampled"]),
                outcome=(bool(row["event"]) and row["time"] <= scenario.outcome.t_horizon)
                if survival
                else bool(row["y"]),
                survival=SurvivalOutcome(time=row["time"], event=bool(row["event"])) if survival else None,
            )
        )
    return records
