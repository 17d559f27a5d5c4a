"""
Design-respecting nonparametric bootstrap.

Each replicate resamples participants with replacement within strata
(arm x case status x design strata), keeping every stratum's size. The
statistic callable re-estimates the sampling design and refits every model
on the replicate. Replicate i draws from its own stream
``SeedSequence(seed, spawn_key=(i,))`` and results are stored by index, so
output does not depend on the number of threads.
"""

from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from copsens.dataset.cohort import ARM, Y, Cohort
from copsens.dataset.design import TwoPhaseDesign
from copsens.platform.config import settings
from copsens.platform.errors import BootstrapFailureError, ConfidenceIntervalError, CopsensError
from copsens.platform.logging import get_logger

logger = get_logger(__name__)

Statistic = Callable[[Cohort], Mapping[str, float | np.ndarray]]


class BootstrapPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_replicates: int = Field(default_factory=lambda: settings.BOOTSTRAP_REPLICATES, ge=2)
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED, ge=0, lt=2**64)
    strata: tuple[str, ...] = ()
    statistics: tuple[str, ...] | None = None
    level: float = Field(0.95, gt=0.0, lt=1.0)


@dataclass
class BootstrapResult:
    replicates: dict[str, np.ndarray]
    ci: dict[str, tuple[np.ndarray, np.ndarray]]
    n_failed: int
    success: list[int] = field(default_factory=list)

    @property
    def n_success(self) -> int:
        return len(self.success)

    def write_replicates(self, directory: str | Path) -> list[Path]:
        """One CSV per statistic: a ``replicate`` column plus one column per element."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, matrix in sorted(self.replicates.items()):
            frame = pd.DataFrame(matrix, columns=[f"v{j}" for j in range(matrix.shape[1])])
            frame.insert(0, "replicate", self.success)
            path = out / f"{name}.csv"
            frame.to_csv(path, index=False)
            written.append(path)
        return written


def resampling_strata(cohort: Cohort, design_strata: Sequence[str] = ()) -> pd.Series:
    f = cohort.frame
    labels = "a=" + f[ARM].astype(str) + "|y=" + f[Y].astype(str)
    for col in design_strata:
        labels = labels + f"|{col}=" + f[col].astype(str)
    return labels


def stratified_indices(strata_labels: Sequence[str] | pd.Series | np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Row indices drawn with replacement within each stratum, stratum sizes preserved."""
    labels = np.asarray(strata_labels, dtype=object)
    out = []
    for label in sorted(set(labels.tolist())):
        members = np.flatnonzero(labels == label)
        out.append(rng.choice(members, size=members.size, replace=True))
    return np.sort(np.concatenate(out)) if out else np.empty(0, dtype=int)


def percentile_ci(values: Sequence[float] | np.ndarray, level: float = 0.95) -> tuple[float, float]:
    """
    Percentile interval over finite replicate values.

    Quantiles use linear interpolation between order statistics at position
    p * (n - 1).

    Raises:
        ConfidenceIntervalError: fewer than 2 finite values
    """
    x = np.asarray(values, dtype=float)
    x = x[np.isfinite(x)]
    if x.size < 2:
        raise ConfidenceIntervalError(f"percentile CI needs at least 2 finite values, got {x.size}")
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(x, [alpha, 1.0 - alpha], method="linear")
    return float(lo), float(hi)


def _column_ci(matrix: np.ndarray, level: float) -> tuple[np.ndarray, np.ndarray]:
    lo = np.full(matrix.shape[1], np.nan)
    hi = np.full(matrix.shape[1], np.nan)
    for j in range(matrix.shape[1]):
        try:
            lo[j], hi[j] = percentile_ci(matrix[:, j], level)
        except ConfidenceIntervalError:
            continue
    return lo, hi


def run_bootstrap(
    cohort: Cohort,
    design: TwoPhaseDesign,
    statistic: Statistic,
    plan: BootstrapPlan,
    threads: int | None = None,
) -> BootstrapResult:
    """
    Run the bootstrap and collect percentile CIs per statistic.

    Replicates raising a CopsensError (non-convergence, empty strata, ...)
    are dropped and counted.

    Raises:
        BootstrapFailureError: more than BOOTSTRAP_MAX_FAILURE_FRACTION of replicates failed
    """
    strata = plan.strata or design.strata_columns
    labels = resampling_strata(cohort, strata)
    threads = max(1, threads or settings.THREADS)

    def one(index: int) -> Mapping[str, float | np.ndarray] | None:
        rng = np.random.default_rng(np.random.SeedSequence(plan.seed, spawn_key=(index,)))
        rep = cohort.resample(stratified_indices(labels, rng))
        try:
            return statistic(rep)
        except CopsensError as exc:
            logger.debug("replicate_failed", replicate=index, error=type(exc).__name__, reason=exc.message)
            return None

    if threads == 1:
        results = [one(i) for i in range(plan.n_replicates)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(plan.n_replicates)))

    success = [i for i, r in enumerate(results) if r is not None]
    n_failed = plan.n_replicates - len(success)
    fraction = n_failed / plan.n_replicates
    if fraction > settings.BOOTSTRAP_MAX_FAILURE_FRACTION:
        raise BootstrapFailureError(
            f"{n_failed} of {plan.n_replicates} bootstrap replicates failed",
            {"failed": n_failed, "replicates": plan.n_replicates},
        )
    if fraction > settings.BOOTSTRAP_WARN_FAILURE_FRACTION:
        logger.warning("bootstrap_failure_rate", failed=n_failed, replicates=plan.n_replicates)

    first = results[success[0]]
    assert first is not None
    names = [n for n in first if plan.statistics is None or n in plan.statistics]
    replicates: dict[str, np.ndarray] = {}
    ci: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    for name in names:
        matrix = np.vstack([np.atleast_1d(np.asarray(results[i][name], dtype=float)) for i in success])  # type: ignore[index]
        replicates[name] = matrix
        ci[name] = _column_ci(matrix, plan.level)

    logger.info("bootstrap_done", replicates=plan.n_replicates, failed=n_failed, threads=threads)
    return BootstrapResult(replicates=replicates, ci=ci, n_failed=n_failed, success=success)
