"""
Trial CSV ingestion.

Reads a UTF-8 CSV with a header row, maps its columns through a
``TrialSchema`` and parses every row into a ``ParticipantRecord``. Rows that
violate a record invariant are rejected individually with a row-level error;
structural problems (missing file, missing columns) raise.
"""

from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from copsens.dataset.cohort import Cohort
from copsens.dataset.records import (
    CovariateValue,
    ParticipantRecord,
    RowError,
    SurvivalOutcome,
    TrialSchema,
)
from copsens.platform.errors import ConfigError, RowValidationError, SchemaError
from copsens.platform.logging import get_logger

logger = get_logger(__name__)

_TRUE = {"1", "true", "t", "yes", "y"}
_FALSE = {"0", "false", "f", "no", "n"}


@dataclass
class LoadResult:
    """Parsed records plus the rows that were rejected."""

    records: list[ParticipantRecord]
    errors: list[RowError] = field(default_factory=list)
    schema: TrialSchema = field(default_factory=TrialSchema)

    def to_cohort(self) -> Cohort:
        return Cohort.from_records(
            self.records,
            covariates=self.schema.covariates,
            categorical=self.schema.categorical,
            t_horizon=self.schema.t_horizon,
        )

    def errors_frame(self) -> pd.DataFrame:
        return pd.DataFrame([e.model_dump() for e in self.errors], columns=["row", "id", "message"])


def _parse_bool(raw: str, column: str) -> bool:
    value = raw.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise RowValidationError(f"{column}: expected a 0/1 flag, got {raw!r}")


def _parse_float(raw: str, column: str) -> float:
    try:
        return float(raw.strip())
    except ValueError:
        raise RowValidationError(f"{column}: non-numeric value {raw!r}")


def _parse_row(row: dict[str, str], schema: TrialSchema) -> ParticipantRecord:
    arm_raw = row[schema.arm].strip()
    if arm_raw not in {"0", "1"}:
        raise RowValidationError(f"{schema.arm}: arm must be 0 or 1, got {arm_raw!r}")
    arm = int(arm_raw)

    sampled = _parse_bool(row[schema.sampled], schema.sampled)

    marker_raw = row[schema.marker].strip()
    marker = None if marker_raw == "" else _parse_float(marker_raw, schema.marker)
    if marker is not None and not sampled:
        raise RowValidationError("marker without sampling")
    if arm == 1 and sampled and marker is None:
        raise RowValidationError("sampled vaccine recipient without marker")

    covariates: dict[str, CovariateValue] = {}
    for name in schema.covariates:
        raw = row[name].strip()
        if raw == "":
            raise RowValidationError(f"missing covariate value: {name}")
        if name in schema.categorical:
            covariates[name] = raw
            continue
        try:
            covariates[name] = float(raw)
        except ValueError:
            covariates[name] = raw

    survival = None
    outcome = None
    if schema.has_survival:
        survival = SurvivalOutcome(
            time=_parse_float(row[schema.time], schema.time),  # type: ignore[index]
            event=_parse_bool(row[schema.event], schema.event),  # type: ignore[index]
        )
        assert schema.t_horizon is not None
        outcome = survival.event and survival.time <= schema.t_horizon
    else:
        outcome = _parse_bool(row[schema.outcome], schema.outcome)  # type: ignore[index]

    weight_override = None
    if schema.weight_override and row[schema.weight_override].strip():
        weight_override = _parse_float(row[schema.weight_override], schema.weight_override)

    return ParticipantRecord(
        id=row[schema.id].strip(),
        arm=arm,  # type: ignore[arg-type]
        covariates=covariates,
        marker=marker,
        sampled=sampled,
        outcome=outcome,
        survival=survival,
        weight_override=weight_override,
    )


def load_trial_csv(path: str | Path, schema: TrialSchema) -> LoadResult:
    """
    Load a trial CSV.

    Args:
        path: CSV file (UTF-8, header row, decimal point, empty cell = missing marker)
        schema: Column mapping

    Returns:
        LoadResult with the accepted records and one RowError per rejected row
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"input file not found: {path}", {"path": str(path)})

    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    missing = [c for c in schema.required_columns() if c not in frame.columns]
    if missing:
        raise SchemaError(
            f"missing required columns: {', '.join(missing)}",
            {"path": str(path), "missing": missing},
        )

    records: list[ParticipantRecord] = []
    errors: list[RowError] = []
    seen: set[str] = set()
    for i, row in enumerate(frame.to_dict("records"), start=1):
        rid = row[schema.id].strip() or None
        try:
            if rid is None:
                raise RowValidationError("empty id")
            if rid in seen:
                raise RowValidationError(f"duplicate id {rid!r}")
            record = _parse_row(row, schema)
        except RowValidationError as e:
            errors.append(RowError(row=i, id=rid, message=e.message))
            continue
        except ValidationError as e:
            msg = "; ".join(str(err["msg"]).removeprefix("Value error, ") for err in e.errors())
            errors.append(RowError(row=i, id=rid, message=msg))
            continue
        seen.add(rid)
        records.append(record)

    if errors:
        logger.warning("rows_rejected", path=str(path), rejected=len(errors), accepted=len(records))
    logger.info("trial_loaded", path=str(path), records=len(records))
    return LoadResult(records=records, errors=errors, schema=schema)
