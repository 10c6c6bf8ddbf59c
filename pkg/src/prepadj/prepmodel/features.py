"""Feature encoding and histogram binning for the boosted-tree learners."""

from __future__ import annotations

import warnings
from collections.abc import Sequence
from typing import Literal

import numpy as np
from pydantic import BaseModel

from prepadj.core.constants import GROUP, MAX_BINS, MISSING_LEVEL, STRATUM
from prepadj.core.exceptions import SchemaError
from prepadj.dataset.table import CohortTable


class FeatureSpec(BaseModel):
    name: str
    kind: Literal["numeric", "indicator"]
    source: str
    level: str | None = None
    thresholds: list[float]


class FeatureEncoder(BaseModel):
    """Column order, categorical encodings and split candidates, frozen at fit time."""

    features: list[FeatureSpec]
    levels: dict[str, list[str]]

    @classmethod
    def fit(
        cls,
        table: CohortTable,
        columns: Sequence[str] | None = None,
        *,
        allow_group: bool = False,
    ) -> FeatureEncoder:
        """Numeric covariates as-is; categoricals, the stratum and (if allowed) the group as indicators.

        Only the decision propensity model may see the group column.
        """
        columns = list(columns) if columns is not None else [*table.covariates, STRATUM]
        if GROUP in columns and not allow_group:
            raise SchemaError("The group column cannot be a feature of a preparedness model", column=GROUP)
        unknown = [c for c in columns if c not in (STRATUM, GROUP) and c not in table.covariates]
        if unknown:
            raise SchemaError(f"Unknown feature column(s): {unknown}", column=unknown[0])

        features: list[FeatureSpec] = []
        levels: dict[str, list[str]] = {}
        for col in columns:
            if col in table.numeric:
                values = table.frame[col].to_numpy(dtype=float)
                features.append(FeatureSpec(
                    name=col, kind="numeric", source=col, thresholds=_split_candidates(values),
                ))
            else:
                col_levels = list(table.levels[col])
                if MISSING_LEVEL not in col_levels:
                    col_levels.append(MISSING_LEVEL)
                levels[col] = col_levels
                for level in col_levels:
                    features.append(FeatureSpec(
                        name=f"{col}[{level}]", kind="indicator", source=col, level=level,
                        thresholds=[0.5],
                    ))
        return cls(features=features, levels=levels)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def n_bins(self) -> np.ndarray:
        return np.array([len(f.thresholds) + 1 for f in self.features], dtype=np.int64)

    def transform(self, table: CohortTable) -> np.ndarray:
        """Dense float matrix in frozen feature order. Unseen levels map to the missing level."""
        X = np.zeros((len(table), len(self.features)), dtype=float)
        codes: dict[str, np.ndarray] = {}
        for col, col_levels in self.levels.items():
            raw = table.frame[col]
            known = raw.isin(col_levels)
            unseen = raw.notna() & ~known
            if unseen.any():
                examples = sorted(raw[unseen].astype(str).unique())[:3]
                warnings.warn(
                    f"Column {col!r}: {int(unseen.sum())} value(s) with unseen level(s) {examples} "
                    f"mapped to {MISSING_LEVEL!r}",
                    stacklevel=2,
                )
            codes[col] = np.where(known.to_numpy(), raw.to_numpy(), MISSING_LEVEL)
        for j, spec in enumerate(self.features):
            if spec.kind == "numeric":
                X[:, j] = table.frame[spec.source].to_numpy(dtype=float)
            else:
                X[:, j] = codes[spec.source] == spec.level
        return X

    def bin(self, X: np.ndarray) -> np.ndarray:
        """Bin index per cell: the number of thresholds strictly below the value."""
        bins = np.empty(X.shape, dtype=np.int32)
        for j, spec in enumerate(self.features):
            bins[:, j] = np.searchsorted(np.asarray(spec.thresholds), X[:, j], side="left")
        return bins


def _split_candidates(values: np.ndarray) -> list[float]:
    observed = values[~np.isnan(values)]
    if observed.size == 0:
        return []
    uniq = np.unique(observed)
    if uniq.size <= MAX_BINS:
        return [float(t) for t in (uniq[:-1] + uniq[1:]) / 2]
    qs = np.quantile(observed, np.linspace(0.0, 1.0, MAX_BINS + 1)[1:-1])
    return [float(t) for t in np.unique(qs)]
