"""End-to-end analysis run shared by the command line and the bootstrap."""

from copsens.pipeline.analysis import (
    AnalysisReport,
    Estimates,
    FixedQuantities,
    evaluate,
    resolve_fixed,
    run_analysis,
)
from copsens.pipeline.config import AnalysisConfig, GridSpec, SensitivityInput

__all__ = [
    "AnalysisConfig",
    "AnalysisReport",
    "Estimates",
    "FixedQuantities",
    "GridSpec",
    "SensitivityInput",
    "evaluate",
    "resolve_fixed",
    "run_analysis",
]
