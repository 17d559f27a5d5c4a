"""
Unit tests for the structured logging processors and run context.
"""

import numpy as np
import structlog

from copsens.platform.logging import add_app_name, coerce_numpy, run_context


def test_coerce_numpy():
    event = coerce_numpy(None, "info", {"rr": np.float64(0.25), "n": np.int64(3), "grid": np.array([0.5, 1.0])})

    assert event == {"rr": 0.25, "n": 3, "grid": [0.5, 1.0]}
    assert type(event["n"]) is int


def test_add_app_name_keeps_explicit_value():
    assert add_app_name(None, "info", {})["app"] == "copsens"
    assert add_app_name(None, "info", {"app": "other"})["app"] == "other"


def test_run_context_binds_and_clears():
    with run_context("abc123", command="analyze"):
        bound = structlog.contextvars.get_contextvars()
        assert bound["run_id"] == "abc123"
        assert bound["command"] == "analyze"

    assert "run_id" not in structlog.contextvars.get_contextvars()
