"""
Two-phase (case-cohort) sampling design.

The marker is measured on all vaccine-arm cases plus a random subcohort of
non-cases. Sampling probabilities are estimated empirically per stratum
(case status, optionally crossed with design strata); the inverse probability
is the participant's weight in every phase-two estimator.
"""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from copsens.dataset.cohort import ARM, MARKER, MARKER_CAT, SAMPLED, WEIGHT_OVERRIDE, Y, Cohort, weighted_quantile
from copsens.platform.errors import DegenerateMarkerError, DesignError
from copsens.platform.logging import get_logger

logger = get_logger(__name__)


def stratum_labels(frame: pd.DataFrame, strata_columns: Sequence[str]) -> pd.Series:
    """Label of each row's sampling stratum, e.g. ``y=0|site=A``."""
    labels = np.where(frame[Y].to_numpy() == 1, "y=1", "y=0").astype(object)
    for col in strata_columns:
        labels = labels + f"|{col}=" + frame[col].astype(str).to_numpy()
    return pd.Series(labels, index=frame.index, dtype=object)


@dataclass(frozen=True)
class TwoPhaseDesign:
    """Estimated sampling probabilities per stratum of the vaccine arm."""

    pi_hat: Mapping[str, float]
    strata_columns: tuple[str, ...] = ()
    counts: Mapping[str, tuple[int, int]] = field(default_factory=dict)

    def labels(self, frame: pd.DataFrame) -> pd.Series:
        return stratum_labels(frame, self.strata_columns)

    def pi_for(self, frame: pd.DataFrame) -> np.ndarray:
        labels = self.labels(frame)
        unknown = set(labels) - set(self.pi_hat)
        if unknown:
            raise DesignError(f"records in unknown strata: {sorted(unknown)}")
        return labels.map(self.pi_hat).to_numpy(dtype=float)

    def weights(self, frame: pd.DataFrame) -> np.ndarray:
        """1/pi_hat per row, replaced by the record's weight override when present."""
        w = 1.0 / self.pi_for(frame)
        override = frame[WEIGHT_OVERRIDE].to_numpy(dtype=float)
        return np.where(np.isnan(override), w, override)


def estimate_sampling_probs(
    cohort: Cohort, strata_def: Sequence[str] | None = None
) -> TwoPhaseDesign:
    """
    Estimate pi_hat(x, y) on the vaccine arm.

    Cases get pi_hat = 1; non-cases get (#sampled non-cases)/(#non-cases) in
    their stratum.

    Raises:
        DesignError: a non-case stratum has no sampled member
    """
    strata = tuple(strata_def or ())
    vac = cohort.frame[cohort.frame[ARM] == 1]
    if vac.empty:
        raise DesignError("no vaccine-arm records")
    labels = stratum_labels(vac, strata)
    measured = vac[SAMPLED] & vac[MARKER].notna()

    pi_hat: dict[str, float] = {}
    counts: dict[str, tuple[int, int]] = {}
    for label in sorted(labels.unique()):
        in_stratum = (labels == label).to_numpy()
        n = int(in_stratum.sum())
        m = int((measured.to_numpy() & in_stratum).sum())
        counts[label] = (n, m)
        if label.startswith("y=1"):
            pi_hat[label] = 1.0
            continue
        if m == 0:
            raise DesignError(
                f"no sampled non-cases in stratum {label}",
                {"stratum": label, "n": n},
            )
        pi_hat[label] = m / n

    logger.debug("sampling_probs_estimated", pi_hat=pi_hat)
    return TwoPhaseDesign(pi_hat=pi_hat, strata_columns=strata, counts=counts)


@dataclass(frozen=True)
class TertileCoding:
    """Tertile-coded copy of a cohort plus its cut-points."""

    cohort: Cohort
    cuts: tuple[float, float]
    ties: str = "lower"


def tertile_code(cohort: Cohort, design: TwoPhaseDesign) -> TertileCoding:
    """
    Recode the marker into tertiles 0/1/2.

    Cut-points are the weighted 1/3 and 2/3 quantiles of the phase-two vaccine
    marker distribution; a value equal to a cut-point goes to the lower tertile.
    The input cohort is left untouched.
    """
    two = cohort.phase_two().frame
    values = two[MARKER].to_numpy(dtype=float)
    if np.unique(values).size < 3:
        raise DegenerateMarkerError(
            "tertile coding needs at least 3 distinct marker values",
            {"distinct": int(np.unique(values).size)},
        )
    c1, c2 = weighted_quantile(values, design.weights(two), [1 / 3, 2 / 3])
    frame = cohort.frame.copy()
    marker = frame[MARKER].to_numpy(dtype=float)
    cats = np.searchsorted(np.array([c1, c2]), marker, side="left").astype(float)
    cats[np.isnan(marker)] = np.nan
    frame[MARKER_CAT] = cats
    logger.info("marker_tertiles", cut_low=float(c1), cut_high=float(c2))
    return TertileCoding(cohort=cohort.with_frame(frame), cuts=(float(c1), float(c2)))
