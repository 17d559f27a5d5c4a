"""
Pytest configuration and shared fixtures.
"""

import json
import os
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

sys.path.append(os.path.join(os.getcwd(), "src"))

# settings are read once at import time
os.environ.setdefault("COPSENS_APP_ENV", "test")
os.environ.setdefault("COPSENS_LOG_LEVEL", "warning")
os.environ.setdefault("COPSENS_THREADS", "1")

from copsens.dataset.cohort import BASE_COLUMNS, Cohort  # noqa: E402
from copsens.sim.generate import generate_frame, trial_schema  # noqa: E402
from copsens.sim.scenario import SimScenario  # noqa: E402

CohortFactory = Callable[..., Cohort]


def build_cohort(
    arm: Sequence[int],
    y: Sequence[int],
    sampled: Sequence[int] | None = None,
    marker: Sequence[float] | None = None,
    covariates: dict[str, Sequence[object]] | None = None,
    categorical: Sequence[str] = (),
    weight_override: Sequence[float] | None = None,
    time: Sequence[float] | None = None,
    event: Sequence[int] | None = None,
    t_horizon: float | None = None,
) -> Cohort:
    """Cohort from column lists; unspecified columns get neutral defaults."""
    n = len(arm)
    covariates = covariates or {}
    frame = pd.DataFrame(
        {
            "id": [f"R{i:04d}" for i in range(n)],
            "arm": list(arm),
            "y": list(y),
            "sampled": [1] * n if sampled is None else list(sampled),
            "marker": np.full(n, np.nan) if marker is None else list(marker),
            "time": np.full(n, np.nan) if time is None else list(time),
            "event": np.full(n, np.nan) if event is None else list(event),
            "weight_override": np.full(n, np.nan) if weight_override is None else list(weight_override),
        },
        columns=BASE_COLUMNS,
    )
    for name, values in covariates.items():
        frame[name] = list(values)
        if name in categorical:
            frame[name] = frame[name].astype(str)
    return Cohort.from_frame(frame, list(covariates), categorical, t_horizon)


@pytest.fixture
def make_cohort() -> CohortFactory:
    """Factory for small hand-built cohorts."""
    return build_cohort


@pytest.fixture
def strong_cop() -> SimScenario:
    return SimScenario.preset("strong-cop")


@pytest.fixture
def confounded() -> SimScenario:
    return SimScenario.preset("confounded")


@pytest.fixture
def null_marker() -> SimScenario:
    return SimScenario.preset("null-marker")


@pytest.fixture
def full_mediation() -> SimScenario:
    return SimScenario.preset("full-mediation")


def write_analysis_inputs(directory: Path, scenario: SimScenario, **config: object) -> Path:
    """Generated trial CSV, schema and analysis config under ``directory``; returns the config path."""
    directory.mkdir(parents=True, exist_ok=True)
    generate_frame(scenario).to_csv(directory / "trial.csv", index=False)
    (directory / "schema.json").write_text(trial_schema(scenario).model_dump_json(), encoding="utf-8")
    payload = {
        "trial": "trial.csv",
        "schema": "schema.json",
        "grid": {"points": 21},
        "bootstrap": {"n_replicates": 20, "seed": 7},
        "output_dir": "out",
        **config,
    }
    path = directory / "analysis.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


@pytest.fixture
def analysis_inputs(tmp_path, strong_cop):
    """Config path for a small strong-correlate trial."""
    return write_analysis_inputs(tmp_path / "study", strong_cop.model_copy(update={"n": 4000}))


@pytest.fixture
def make_analysis_inputs() -> Callable[..., Path]:
    """Factory for analysis inputs from any scenario."""
    return write_analysis_inputs
