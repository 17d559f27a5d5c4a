"""
Analysis-ready cohort table.

A ``Cohort`` wraps an immutable pandas DataFrame with one row per participant
and canonical column names (``id, arm, y, sampled, marker, time, event,
weight_override`` plus one column per covariate). All estimators consume
cohorts; the bootstrap resamples their rows.
"""

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from copsens.dataset.records import CovariateValue, ParticipantRecord, SurvivalOutcome

ID = "id"
ARM = "arm"
Y = "y"
SAMPLED = "sampled"
MARKER = "marker"
MARKER_CAT = "marker_cat"
TIME = "time"
EVENT = "event"
WEIGHT_OVERRIDE = "weight_override"

BASE_COLUMNS = [ID, ARM, Y, SAMPLED, MARKER, TIME, EVENT, WEIGHT_OVERRIDE]


def weighted_quantile(
    values: Sequence[float] | np.ndarray,
    weights: Sequence[float] | np.ndarray | None,
    probs: float | Sequence[float] | np.ndarray,
) -> np.ndarray:
    """
    Inverse of the weighted empirical CDF.

    Returns, for each p, the smallest observed x with F_w(x) >= p. With equal
    weights this is the textbook (type 1) empirical quantile.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("weighted_quantile of an empty sample")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    order = np.argsort(x, kind="mergesort")
    x, w = x[order], w[order]
    cdf = np.cumsum(w) / w.sum()
    p = np.atleast_1d(np.asarray(probs, dtype=float))
    idx = np.searchsorted(cdf, p - 1e-12, side="left")
    return x[np.clip(idx, 0, x.size - 1)]


@dataclass(frozen=True)
class Cohort:
    """Immutable participant table plus covariate metadata."""

    frame: pd.DataFrame
    covariates: tuple[str, ...] = ()
    categorical: frozenset[str] = field(default_factory=frozenset)
    t_horizon: float | None = None

    def __post_init__(self) -> None:
        missing = [c for c in BASE_COLUMNS + list(self.covariates) if c not in self.frame]
        if missing:
            raise ValueError(f"cohort frame lacks columns {missing}")

    # -------------------------------------------------------------------------
    # Construction
    # -------------------------------------------------------------------------

    @classmethod
    def from_records(
        cls,
        records: Iterable[ParticipantRecord],
        covariates: Sequence[str] | None = None,
        categorical: Iterable[str] = (),
        t_horizon: float | None = None,
    ) -> "Cohort":
        records = list(records)
        if covariates is None:
            covariates = sorted({k for r in records for k in r.covariates})
        rows = []
        for r in records:
            row: dict[str, object] = {
                ID: r.id,
                ARM: r.arm,
                Y: int(r.binary_outcome(t_horizon)),
                SAMPLED: r.sampled,
                MARKER: np.nan if r.marker is None else r.marker,
                TIME: np.nan if r.survival is None else r.survival.time,
                EVENT: np.nan if r.survival is None else float(r.survival.event),
                WEIGHT_OVERRIDE: np.nan if r.weight_override is None else r.weight_override,
            }
            for name in covariates:
                row[name] = r.covariates[name]
            rows.append(row)
        frame = pd.DataFrame(rows, columns=BASE_COLUMNS + list(covariates))
        cats = set(categorical)
        for name in covariates:
            if name in cats or frame[name].map(lambda v: isinstance(v, str)).any():
                cats.add(name)
                frame[name] = frame[name].astype(str)
            else:
                frame[name] = frame[name].astype(float)
        return cls.from_frame(frame, covariates, cats, t_horizon)

    @classmethod
    def from_frame(
        cls,
        frame: pd.DataFrame,
        covariates: Sequence[str],
        categorical: Iterable[str] = (),
        t_horizon: float | None = None,
    ) -> "Cohort":
        frame = frame.reset_index(drop=True).copy()
        frame[ARM] = frame[ARM].astype(int)
        frame[Y] = frame[Y].astype(int)
        frame[SAMPLED] = frame[SAMPLED].astype(bool)
        for col in (MARKER, TIME, EVENT, WEIGHT_OVERRIDE):
            frame[col] = frame[col].astype(float)
        return cls(frame, tuple(covariates), frozenset(categorical), t_horizon)

    def to_records(self) -> list[ParticipantRecord]:
        out = []
        for row in self.frame.to_dict("records"):
            covs: dict[str, CovariateValue] = {
                c: (str(row[c]) if c in self.categorical else float(row[c])) for c in self.covariates
            }
            survival = None
            if not pd.isna(row[TIME]):
                survival = SurvivalOutcome(time=row[TIME], event=bool(row[EVENT]))
            out.append(
                ParticipantRecord(
                    id=str(row[ID]),
                    arm=int(row[ARM]),  # type: ignore[arg-type]
                    covariates=covs,
                    marker=None if pd.isna(row[MARKER]) else float(row[MARKER]),
                    sampled=bool(row[SAMPLED]),
                    outcome=bool(row[Y]),
                    survival=survival,
                    weight_override=(
                        None if pd.isna(row[WEIGHT_OVERRIDE]) else float(row[WEIGHT_OVERRIDE])
                    ),
                )
            )
        return out

    # -------------------------------------------------------------------------
    # Views
    # -------------------------------------------------------------------------

    def with_frame(self, frame: pd.DataFrame) -> "Cohort":
        return Cohort(frame.reset_index(drop=True), self.covariates, self.categorical, self.t_horizon)

    def subset(self, mask: np.ndarray | pd.Series) -> "Cohort":
        return self.with_frame(self.frame.loc[np.asarray(mask, dtype=bool)])

    def vaccine(self) -> "Cohort":
        return self.subset(self.frame[ARM] == 1)

    def placebo(self) -> "Cohort":
        return self.subset(self.frame[ARM] == 0)

    def phase_two(self) -> "Cohort":
        """Vaccine recipients with a measured marker (M=1)."""
        f = self.frame
        return self.subset((f[ARM] == 1) & f[SAMPLED] & f[MARKER].notna())

    def resample(self, indices: np.ndarray) -> "Cohort":
        return self.with_frame(self.frame.iloc[indices])

    @property
    def has_survival(self) -> bool:
        return bool(len(self.frame)) and bool(self.frame[TIME].notna().all())

    def __len__(self) -> int:
        return len(self.frame)


def covariate_groups(cohort: Cohort, name: str, max_numeric_levels: int = 5) -> pd.Series:
    """
    Group labels for a covariate.

    Categorical covariates group by level. Numeric covariates with few distinct
    values group by value; otherwise they are split at the median.
    """
    col = cohort.frame[name]
    if name in cohort.categorical:
        return col.astype(str)
    values = np.sort(col.unique())
    if len(values) <= max_numeric_levels:
        return col.map(lambda v: f"{v:g}")
    median = float(np.median(col))
    return pd.Series(
        np.where(col <= median, f"<={median:g}", f">{median:g}"), index=col.index
    )


def ordered_levels(cohort: Cohort, name: str, labels: pd.Series) -> list[str]:
    """Group labels in reference-first order (numeric order for numeric covariates)."""
    uniq = list(pd.unique(labels))
    if name in cohort.categorical:
        return sorted(uniq)
    if all(u.startswith(("<=", ">")) for u in uniq):
        return sorted(uniq, key=lambda u: 0 if u.startswith("<=") else 1)
    return sorted(uniq, key=float)
