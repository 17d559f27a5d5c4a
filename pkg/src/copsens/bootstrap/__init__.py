"""Stratified participant-level bootstrap with percentile intervals."""

from copsens.bootstrap.engine import (
    BootstrapPlan,
    BootstrapResult,
    percentile_ci,
    resampling_strata,
    run_bootstrap,
    stratified_indices,
)

__all__ = [
    "BootstrapPlan",
    "BootstrapResult",
    "percentile_ci",
    "resampling_strata",
    "run_bootstrap",
    "stratified_indices",
]
