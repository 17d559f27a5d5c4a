"""Trial data ingestion, two-phase design weights and design diagnostics."""

from copsens.dataset.cohort import Cohort, weighted_quantile
from copsens.dataset.design import TertileCoding, TwoPhaseDesign, estimate_sampling_probs, tertile_code
from copsens.dataset.diagnostics import (
    CohortSummary,
    cohort_summary,
    confounder_association_table,
    positivity_report,
    weights_table,
)
from copsens.dataset.loader import LoadResult, load_trial_csv
from copsens.dataset.records import ParticipantRecord, RowError, SurvivalOutcome, TrialSchema

__all__ = [
    "Cohort",
    "CohortSummary",
    "LoadResult",
    "ParticipantRecord",
    "RowError",
    "SurvivalOutcome",
    "TertileCoding",
    "TrialSchema",
    "TwoPhaseDesign",
    "cohort_summary",
    "confounder_association_table",
    "estimate_sampling_probs",
    "load_trial_csv",
    "positivity_report",
    "tertile_code",
    "weighted_quantile",
    "weights_table",
]
