"""
Curve containers shared by the marginal, sensitivity and cve packages.
"""

import enum
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd


class CurveKind(str, enum.Enum):
    MARGINALIZED_RISK = "marginalized-risk"
    CONTROLLED_RISK_BOUND = "controlled-risk-bound"
    CVE_NAIVE = "cve-naive"
    CVE_CONSERVATIVE = "cve-conservative"

    @property
    def is_risk(self) -> bool:
        return self in (CurveKind.MARGINALIZED_RISK, CurveKind.CONTROLLED_RISK_BOUND)


@dataclass(frozen=True)
class CurveEstimate:
    """A curve evaluated on a marker grid, with optional pointwise 95% bands."""

    grid: np.ndarray
    point: np.ndarray
    kind: CurveKind
    ci_lo: np.ndarray | None = None
    ci_hi: np.ndarray | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid, dtype=float)
        point = np.asarray(self.point, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "kind", CurveKind(self.kind))
        if grid.shape != point.shape or grid.ndim != 1:
            raise ValueError("grid and point must be 1-d sequences of equal length")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if self.kind.is_risk and np.any((point < 0) | (point > 1)):
            raise ValueError(f"{self.kind.value} values must lie in [0, 1]")
        if (self.ci_lo is None) != (self.ci_hi is None):
            raise ValueError("ci_lo and ci_hi must be given together")
        if self.ci_lo is not None and self.ci_hi is not None:
            lo = np.asarray(self.ci_lo, dtype=float)
            hi = np.asarray(self.ci_hi, dtype=float)
            if lo.shape != grid.shape or hi.shape != grid.shape:
                raise ValueError("CI bands must match the grid")
            ok = np.isnan(lo) | np.isnan(hi) | ((lo <= point + 1e-12) & (point <= hi + 1e-12))
            if not ok.all():
                raise ValueError("CI must bracket the point estimate")
            object.__setattr__(self, "ci_lo", lo)
            object.__setattr__(self, "ci_hi", hi)

    @property
    def has_ci(self) -> bool:
        return self.ci_lo is not None

    def with_ci(self, lo: np.ndarray, hi: np.ndarray, **meta: Any) -> "CurveEstimate":
        # widened so that lo <= point <= hi
        lo = np.minimum(np.asarray(lo, dtype=float), self.point)
        hi = np.maximum(np.asarray(hi, dtype=float), self.point)
        return replace(self, ci_lo=lo, ci_hi=hi, meta={**self.meta, **meta})

    def value_at(self, s: float) -> float:
        idx = np.flatnonzero(np.isclose(self.grid, s, rtol=0.0, atol=1e-12))
        if idx.size == 0:
            raise KeyError(s)
        return float(self.point[idx[0]])

    def to_frame(self) -> pd.DataFrame:
        n = self.grid.size
        scent = self.meta.get("scent")
        flag = np.zeros(n, dtype=bool) if scent is None else np.isclose(self.grid, scent, rtol=0.0, atol=1e-12)
        return pd.DataFrame(
            {
                "s": self.grid,
                "estimate": self.point,
                "ci_lo": self.ci_lo if self.ci_lo is not None else np.full(n, np.nan),
                "ci_hi": self.ci_hi if self.ci_hi is not None else np.full(n, np.nan),
                "kind": self.kind.value,
                "scent_flag": flag,
            }
        )

    def to_csv(self, path: str | Path) -> None:
        self.to_frame().to_csv(path, index=False)
