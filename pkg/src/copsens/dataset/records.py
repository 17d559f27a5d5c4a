"""
Participant-level records and the CSV column schema.

A record is the observed data unit of one trial participant: arm, baseline
covariates X, the phase-two marker S (log10 scale, present only when the
participant was sampled), the sampling indicator M, and a binary outcome Y
and/or a survival pair.
"""

import json
import math
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from copsens.platform.errors import ConfigError

CovariateValue = float | str

RESERVED_COLUMNS = frozenset(
    {"id", "arm", "y", "sampled", "marker", "marker_cat", "time", "event", "weight_override"}
)


class SurvivalOutcome(BaseModel):
    """Follow-up time in days and event indicator."""

    model_config = ConfigDict(frozen=True)

    time: float = Field(..., ge=0)
    event: bool


class ParticipantRecord(BaseModel):
    """One trial participant."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1)
    arm: Literal[0, 1]
    covariates: dict[str, CovariateValue] = Field(default_factory=dict)
    marker: float | None = None
    sampled: bool
    outcome: bool | None = None
    survival: SurvivalOutcome | None = None
    weight_override: float | None = Field(default=None, gt=0)

    @field_validator("marker")
    @classmethod
    def _finite_marker(cls, value: float | None) -> float | None:
        if value is not None and not math.isfinite(value):
            raise ValueError("marker must be a finite number")
        return value

    @model_validator(mode="after")
    def _check_invariants(self) -> "ParticipantRecord":
        # S is observed only when M=1
        if self.marker is not None and not self.sampled:
            raise ValueError("marker without sampling")
        if self.outcome is None and self.survival is None:
            raise ValueError("record needs a binary outcome or a survival pair")
        return self

    def binary_outcome(self, t_horizon: float | None = None) -> bool:
        """Y, derived as I(time <= t_horizon and event) when a horizon is given."""
        if self.survival is not None and t_horizon is not None:
            return self.survival.event and self.survival.time <= t_horizon
        if self.outcome is not None:
            return self.outcome
        assert self.survival is not None
        return self.survival.event


class TrialSchema(BaseModel):
    """Mapping from CSV column names to record fields."""

    id: str = "id"
    arm: str = "arm"
    outcome: str | None = "y"
    time: str | None = None
    event: str | None = None
    sampled: str = "sampled"
    marker: str = "marker"
    weight_override: str | None = None
    covariates: list[str] = Field(default_factory=list)
    categorical: list[str] = Field(
        default_factory=list,
        description="Numeric-looking covariates that must be treated as factors",
    )
    t_horizon: float | None = Field(default=None, gt=0)
    design_strata: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_outcome_spec(self) -> "TrialSchema":
        if (self.time is None) != (self.event is None):
            raise ValueError("time and event columns must be mapped together")
        if self.time is not None and self.t_horizon is None:
            raise ValueError("t_horizon is required when time/event columns are mapped")
        if self.time is None and self.outcome is None:
            raise ValueError("map either an outcome column or time+event columns")
        clashes = RESERVED_COLUMNS.intersection(self.covariates)
        if clashes:
            raise ValueError(f"covariate names clash with reserved names: {sorted(clashes)}")
        unknown = set(self.categorical) - set(self.covariates)
        if unknown:
            raise ValueError(f"categorical names not among covariates: {sorted(unknown)}")
        missing = set(self.design_strata) - set(self.covariates)
        if missing:
            raise ValueError(f"design strata must be covariates: {sorted(missing)}")
        return self

    @property
    def has_survival(self) -> bool:
        return self.time is not None

    def required_columns(self) -> list[str]:
        cols = [self.id, self.arm, self.sampled, self.marker]
        if self.has_survival:
            cols += [self.time, self.event]  # type: ignore[list-item]
        else:
            cols.append(self.outcome)  # type: ignore[arg-type]
        if self.weight_override:
            cols.append(self.weight_override)
        return cols + list(self.covariates)

    @classmethod
    def from_json(cls, path: str | Path) -> "TrialSchema":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"schema file not found: {path}", {"path": str(path)})
        try:
            return cls.model_validate(json.loads(path.read_text(encoding="utf-8")))
        except (json.JSONDecodeError, ValidationError) as e:
            raise ConfigError(f"invalid schema file {path}: {e}", {"path": str(path)})


class RowError(BaseModel):
    """A rejected CSV row."""

    row: int = Field(..., description="1-based data row number (header excluded)")
    id: str | None = None
    message: str
