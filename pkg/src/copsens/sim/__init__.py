"""Trial simulator with exact counterfactual truths, used as the oracle for every estimator."""

from copsens.sim.generate import generate_frame, generate_trial, placebo_sentinel, trial_schema
from copsens.sim.scenario import PRESETS, SimScenario
from copsens.sim.truth import (
    TruthTables,
    confounding_strength,
    default_truth_grid,
    true_controlled_risk,
    true_placebo_risk,
    true_rr_c,
    truth_table,
)

__all__ = [
    "PRESETS",
    "SimScenario",
    "TruthTables",
    "confounding_strength",
    "default_truth_grid",
    "generate_frame",
    "generate_trial",
    "placebo_sentinel",
    "trial_schema",
    "true_controlled_risk",
    "true_placebo_risk",
    "true_rr_c",
    "truth_table",
]
