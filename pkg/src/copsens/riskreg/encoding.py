"""
Design-matrix encoding for risk models.

A formula is an ordered list of term names. The marker term is ``marker``
(linear in log10 marker) or ``marker_cat`` (tertile factor, reference 0);
every other term is a covariate. Categorical covariates are one-hot encoded
against their lexicographically first level. The encoding is stored in the
fitted model so that predictions are reproducible.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
import pandas as pd

from copsens.platform.errors import ConfigError, PredictionError

MARKER_TERMS = ("marker", "marker_cat")
MARKER_CAT_LEVELS = (0, 1, 2)
INTERCEPT = "(Intercept)"


@dataclass(frozen=True)
class CovariateEncoding:
    name: str
    kind: Literal["numeric", "categorical"]
    levels: tuple[str, ...] = ()

    @property
    def columns(self) -> list[str]:
        if self.kind == "numeric":
            return [self.name]
        return [f"{self.name}[{lv}]" for lv in self.levels[1:]]


@dataclass(frozen=True)
class DesignEncoding:
    marker_term: Literal["marker", "marker_cat"] | None
    covariates: tuple[CovariateEncoding, ...] = ()
    intercept: bool = True

    @property
    def term_names(self) -> list[str]:
        names = [INTERCEPT] if self.intercept else []
        if self.marker_term == "marker":
            names.append("marker")
        elif self.marker_term == "marker_cat":
            names += [f"marker_cat[{lv}]" for lv in MARKER_CAT_LEVELS[1:]]
        for cov in self.covariates:
            names += cov.columns
        return names

    def marker_columns(self, marker: np.ndarray) -> np.ndarray:
        if self.marker_term is None:
            return np.empty((marker.shape[0], 0))
        if self.marker_term == "marker":
            return marker.reshape(-1, 1).astype(float)
        bad = ~np.isin(marker, MARKER_CAT_LEVELS)
        if bad.any():
            raise PredictionError(
                f"marker_cat values must be tertile codes 0/1/2, got {sorted(set(marker[bad].tolist()))}"
            )
        return np.column_stack([(marker == lv).astype(float) for lv in MARKER_CAT_LEVELS[1:]])

    def matrix(self, marker: np.ndarray | None, frame: pd.DataFrame) -> np.ndarray:
        """Design matrix for marker values ``marker`` and covariates from ``frame``."""
        n = len(frame)
        blocks = []
        if self.intercept:
            blocks.append(np.ones((n, 1)))
        if self.marker_term is not None:
            if marker is None:
                raise PredictionError("model has a marker term but no marker values were given")
            blocks.append(self.marker_columns(np.broadcast_to(np.asarray(marker, dtype=float), (n,))))
        for cov in self.covariates:
            if cov.name not in frame:
                raise PredictionError(f"missing covariate {cov.name!r}")
            col = frame[cov.name]
            if cov.kind == "numeric":
                blocks.append(col.to_numpy(dtype=float).reshape(-1, 1))
                continue
            values = col.astype(str).to_numpy()
            unseen = set(values) - set(cov.levels)
            if unseen:
                raise PredictionError(
                    f"unseen level(s) {sorted(unseen)} for covariate {cov.name!r}",
                    {"covariate": cov.name, "levels": sorted(unseen)},
                )
            blocks.append(np.column_stack([(values == lv).astype(float) for lv in cov.levels[1:]])
                          if len(cov.levels) > 1 else np.empty((n, 0)))
        return np.hstack(blocks) if blocks else np.empty((n, 0))


def build_encoding(
    frame: pd.DataFrame,
    formula: Sequence[str],
    categorical: frozenset[str] | set[str],
    intercept: bool = True,
) -> DesignEncoding:
    """Build an encoding from the data a model is fitted on."""
    marker_terms = [t for t in formula if t in MARKER_TERMS]
    if len(marker_terms) > 1:
        raise ConfigError("formula may contain only one marker term")
    covariates = []
    for term in formula:
        if term in MARKER_TERMS:
            continue
        if term not in frame:
            raise ConfigError(f"formula term {term!r} is not a covariate column")
        if term in categorical:
            levels = tuple(sorted(frame[term].astype(str).unique()))
            covariates.append(CovariateEncoding(term, "categorical", levels))
        else:
            covariates.append(CovariateEncoding(term, "numeric"))
    return DesignEncoding(
        marker_term=marker_terms[0] if marker_terms else None,  # type: ignore[arg-type]
        covariates=tuple(covariates),
        intercept=intercept,
    )
