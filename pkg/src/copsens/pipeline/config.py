"""
Analysis configuration (JSON file).

Relative paths are resolved against the directory of the config file.
"""

import hashlib
import json
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from copsens.bootstrap.engine import BootstrapPlan
from copsens.platform.errors import ConfigError


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    points: int = Field(101, ge=1)
    lo_quantile: float = Field(0.025, gt=0, lt=1)
    hi_quantile: float = Field(0.975, gt=0, lt=1)
    values: list[float] | None = None

    @model_validator(mode="after")
    def _check(self) -> "GridSpec":
        if not self.lo_quantile < self.hi_quantile:
            raise ValueError("grid quantiles must be ordered")
        if self.values is not None and any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("explicit grid values must be strictly increasing")
        return self


class SensitivityInput(BaseModel):
    """JSON form of the sensitivity spec; explicit marker values win over quantiles."""

    model_config = ConfigDict(frozen=True)

    rr_u_fix: float = Field(4.0, ge=1.0)
    s1_fix_quantile: float = Field(0.15, gt=0, lt=1)
    s2_fix_quantile: float = Field(0.85, gt=0, lt=1)
    s1_fix: float | None = None
    s2_fix: float | None = None

    @model_validator(mode="after")
    def _check(self) -> "SensitivityInput":
        if not self.s1_fix_quantile < self.s2_fix_quantile:
            raise ValueError("sensitivity quantiles must be ordered")
        if (self.s1_fix is None) != (self.s2_fix is None):
            raise ValueError("s1_fix and s2_fix must be given together")
        return self


class AnalysisConfig(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    trial: Path
    schema_file: Path = Field(..., alias="schema")
    family: Literal["logistic", "cox"] = "logistic"
    t_horizon: float | None = Field(default=None, gt=0)
    covariates: list[str] | None = None
    marker_mode: Literal["quantitative", "tertile"] = "quantitative"
    grid: GridSpec = Field(default_factory=GridSpec)
    sensitivity: SensitivityInput = Field(default_factory=SensitivityInput)
    bootstrap: BootstrapPlan = Field(default_factory=BootstrapPlan)
    contrast_quantiles: tuple[float, float] = (0.15, 0.85)
    output_dir: Path = Path("out")
    llod: float | None = None
    design_strata: list[str] | None = None
    confounder_ci: bool = False

    @model_validator(mode="after")
    def _check(self) -> "AnalysisConfig":
        q1, q2 = self.contrast_quantiles
        if not 0.0 < q1 < q2 < 1.0:
            raise ValueError("contrast quantiles must satisfy 0 < q1 < q2 < 1")
        return self

    @property
    def risk_family(self) -> Literal["weighted-logistic", "case-cohort-cox"]:
        return "weighted-logistic" if self.family == "logistic" else "case-cohort-cox"

    def digest(self) -> str:
        payload = self.model_dump_json(by_alias=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def with_overrides(self, seed: int | None = None) -> "AnalysisConfig":
        if seed is None:
            return self
        try:
            plan = BootstrapPlan.model_validate({**self.bootstrap.model_dump(), "seed": seed})
        except ValidationError as e:
            raise ConfigError(f"invalid seed {seed}: {e}", {"seed": seed})
        return self.model_copy(update={"bootstrap": plan})

    @classmethod
    def from_json(cls, path: str | Path) -> "AnalysisConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}", {"path": str(path)})
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid config file {path}: {e}", {"path": str(path)})
        base = path.parent
        for key in ("trial", "schema", "output_dir"):
            if key in raw and not Path(raw[key]).is_absolute():
                raw[key] = str(base / raw[key])
        raw.setdefault("output_dir", str(base / "out"))
        try:
            config = cls.model_validate(raw)
        except ValidationError as e:
            raise ConfigError(f"invalid config file {path}: {e}", {"path": str(path)})
        for ref in (config.trial, config.schema_file):
            if not ref.exists():
                raise ConfigError(f"input file not found: {ref}", {"path": str(ref)})
        return config
