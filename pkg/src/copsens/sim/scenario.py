"""
Simulation scenarios with known counterfactual truth.

X is one discrete covariate with at most five levels, U an optional binary
unmeasured confounder with P(U=1 | X). The vaccine-arm marker is normal on
the log10 scale given (X, U), except for an optional fraction of vaccine
non-responders whose marker sits below the LLOD at the placebo sentinel
value. Outcome risks are logistic in the centered marker, X effects and U:

    vaccine:  logit P(Y=1 | s, x, u) = a1 + b (s - c) + e_x + g u
    placebo:  logit P(Y=1 | x, u)    = a0 + e_x + g u
"""

import json
from importlib import resources
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from scipy.special import expit

from copsens.platform.errors import ConfigError

PRESETS = ("null-marker", "strong-cop", "confounded", "full-mediation")


class CovariateLaw(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = "age_group"
    levels: list[str] = Field(default_factory=lambda: ["child", "teen"])
    probs: list[float] = Field(default_factory=lambda: [0.5, 0.5])
    marker_shift: list[float] = Field(default_factory=lambda: [0.0, 0.0])
    logit_effect: list[float] = Field(default_factory=lambda: [0.0, 0.0])

    @model_validator(mode="after")
    def _check(self) -> "CovariateLaw":
        k = len(self.levels)
        if not 1 <= k <= 5:
            raise ValueError("covariate must have between 1 and 5 levels")
        if len(set(self.levels)) != k:
            raise ValueError("covariate levels must be distinct")
        if any(len(v) != k for v in (self.probs, self.marker_shift, self.logit_effect)):
            raise ValueError("probs, marker_shift and logit_effect need one entry per level")
        if any(p < 0 or p > 1 for p in self.probs) or abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError("covariate probabilities must lie in [0, 1] and sum to 1")
        return self


class UnmeasuredLaw(BaseModel):
    model_config = ConfigDict(frozen=True)

    prob_by_level: list[float]
    marker_shift: float = 0.0
    logit_effect: float = 0.0

    @model_validator(mode="after")
    def _check(self) -> "UnmeasuredLaw":
        if any(p < 0 or p > 1 for p in self.prob_by_level):
            raise ValueError("P(U=1 | x) must lie in [0, 1]")
        return self


class MarkerLaw(BaseModel):
    model_config = ConfigDict(frozen=True)

    mean: float = 2.0
    sd: float = Field(0.5, gt=0)
    llod: float | None = None
    nonresponder_fraction: float = Field(0.0, ge=0, lt=1)


class OutcomeLaw(BaseModel):
    model_config = ConfigDict(frozen=True)

    family: Literal["binary", "survival"] = "binary"
    vaccine_intercept: float = -4.0
    marker_coef: float = -1.0
    marker_center: float = 2.0
    placebo_intercept: float = -2.75
    t_horizon: float = Field(365.0, gt=0)


class SimScenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = "custom"
    n: int = Field(..., gt=0)
    seed: int = Field(0, ge=0, lt=2**64)
    vaccine_fraction: float = Field(2.0 / 3.0, gt=0, lt=1)
    covariate: CovariateLaw = Field(default_factory=CovariateLaw)
    unmeasured: UnmeasuredLaw | None = None
    marker: MarkerLaw = Field(default_factory=MarkerLaw)
    outcome: OutcomeLaw = Field(default_factory=OutcomeLaw)
    subsample_rate: float = Field(0.2, ge=0, le=1)

    @model_validator(mode="after")
    def _check(self) -> "SimScenario":
        if self.unmeasured is not None and len(self.unmeasured.prob_by_level) != len(self.covariate.levels):
            raise ValueError("unmeasured.prob_by_level needs one entry per covariate level")
        if self.marker.nonresponder_fraction > 0 and self.marker.llod is None:
            raise ValueError("non-responders need marker.llod")
        return self

    # -------------------------------------------------------------------------
    # Outcome law
    # -------------------------------------------------------------------------

    def u_prob(self) -> np.ndarray:
        """P(U=1 | x) per covariate level."""
        if self.unmeasured is None:
            return np.zeros(len(self.covariate.levels))
        return np.asarray(self.unmeasured.prob_by_level, dtype=float)

    def vaccine_risk(self, s: float | np.ndarray, x: int | np.ndarray, u: int | np.ndarray) -> np.ndarray:
        o = self.outcome
        g = self.unmeasured.logit_effect if self.unmeasured else 0.0
        eta = (
            o.vaccine_intercept
            + o.marker_coef * (np.asarray(s, dtype=float) - o.marker_center)
            + np.asarray(self.covariate.logit_effect)[x]
            + g * np.asarray(u)
        )
        return expit(eta)

    def placebo_risk(self, x: int | np.ndarray, u: int | np.ndarray) -> np.ndarray:
        g = self.unmeasured.logit_effect if self.unmeasured else 0.0
        eta = self.outcome.placebo_intercept + np.asarray(self.covariate.logit_effect)[x] + g * np.asarray(u)
        return expit(eta)

    def marker_mean(self, x: int | np.ndarray, u: int | np.ndarray) -> np.ndarray:
        shift_u = self.unmeasured.marker_shift if self.unmeasured else 0.0
        return self.marker.mean + np.asarray(self.covariate.marker_shift)[x] + shift_u * np.asarray(u)

    # -------------------------------------------------------------------------
    # Loading
    # -------------------------------------------------------------------------

    @classmethod
    def from_json(cls, path: str | Path) -> "SimScenario":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"scenario file not found: {path}", {"path": str(path)})
        try:
            return cls.model_validate(json.loads(path.read_text(encoding="utf-8")))
        except (json.JSONDecodeError, ValidationError) as e:
            raise ConfigError(f"invalid scenario file {path}: {e}", {"path": str(path)})

    @classmethod
    def preset(cls, name: str) -> "SimScenario":
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}", {"presets": list(PRESETS)})
        text = resources.files("copsens.sim.presets").joinpath(f"{name}.json").read_text(encoding="utf-8")
        return cls.model_validate(json.loads(text))

    @classmethod
    def resolve(cls, ref: str) -> "SimScenario":
        """A preset name or a path to a scenario JSON file."""
        return cls.preset(ref) if ref in PRESETS else cls.from_json(ref)
