"""Immutable cohort table plus classification, imputation, filtering and splitting."""

from __future__ import annotations

from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from prepadj.core.constants import (
    ASSESSED,
    COHORT,
    DECISION,
    DEFAULT_REFERENCE_GROUP,
    GROUP,
    MISSING_LEVEL,
    PASSED,
    STRATUM,
    UNIT_ID,
)
from prepadj.core.exceptions import ConfigError, DataError, SchemaError


class InformationStatus(str, Enum):
    COMPLETE = "Complete"
    INCOMPLETE = "Incomplete"


class ImputationMeans(BaseModel):
    """Numeric means recorded by impute_means, keyed column -> cohort -> mean."""

    by_cohort: dict[str, dict[str, float]] = Field(default_factory=dict)
    pooled: dict[str, float] = Field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class CohortTable:
    """Unit records in canonical column layout.

    `frame` holds unit_id, group, stratum, decision, assessed, passed (NaN when
    not assessed), cohort, then the covariates. Level orderings are frozen at
    construction; the reference group is always the first group level.
    """

    frame: pd.DataFrame
    numeric: tuple[str, ...]
    categorical: tuple[str, ...]
    levels: Mapping[str, tuple[str, ...]]
    reference_group: str = DEFAULT_REFERENCE_GROUP
    imputation: ImputationMeans | None = field(default=None)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def covariates(self) -> tuple[str, ...]:
        return self.numeric + self.categorical

    @property
    def groups(self) -> tuple[str, ...]:
        return self.levels[GROUP]

    @property
    def strata(self) -> tuple[str, ...]:
        return self.levels[STRATUM]

    @property
    def unit_ids(self) -> np.ndarray:
        return self.frame[UNIT_ID].to_numpy()

    @property
    def group(self) -> np.ndarray:
        return self.frame[GROUP].to_numpy()

    @property
    def stratum(self) -> np.ndarray:
        return self.frame[STRATUM].to_numpy()

    @property
    def decision(self) -> np.ndarray:
        return self.frame[DECISION].to_numpy(dtype=float)

    @property
    def assessed(self) -> np.ndarray:
        return self.frame[ASSESSED].to_numpy(dtype=float)

    @property
    def passed(self) -> np.ndarray:
        return self.frame[PASSED].to_numpy(dtype=float)

    def with_frame(self, frame: pd.DataFrame, **changes) -> CohortTable:
        return replace(self, frame=frame.reset_index(drop=True), **changes)

    def take(self, indices: Sequence[int] | np.ndarray) -> CohortTable:
        """Rows by position (repeats allowed); levels stay frozen."""
        return self.with_frame(self.frame.iloc[np.asarray(indices, dtype=int)])


def freeze_levels(
    frame: pd.DataFrame,
    categorical: Sequence[str],
    reference_group: str,
) -> dict[str, tuple[str, ...]]:
    """Explicit level orderings: reference group first, everything else sorted."""
    groups = sorted(frame[GROUP].unique())
    if reference_group not in groups:
        raise SchemaError(
            f"Reference group {reference_group!r} not present; groups are {groups}",
            column=GROUP,
        )
    levels: dict[str, tuple[str, ...]] = {
        GROUP: (reference_group, *[g for g in groups if g != reference_group]),
        STRATUM: tuple(sorted(frame[STRATUM].unique())),
        COHORT: tuple(sorted(frame[COHORT].unique())),
    }
    for col in categorical:
        levels[col] = tuple(sorted(frame[col].dropna().astype(str).unique()))
    return levels


def validate_frame(frame: pd.DataFrame) -> None:
    """Enforce the unit-level invariants, reporting the first offending row."""
    for col in (GROUP, STRATUM):
        bad = np.flatnonzero(frame[col].isna().to_numpy())
        if bad.size:
            raise DataError(f"Row {bad[0]}: missing {col}", row=int(bad[0]), column=col)

    for col in (DECISION, ASSESSED):
        values = frame[col].to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isin(values, (0.0, 1.0)))
        if bad.size:
            raise DataError(
                f"Row {bad[0]}: {col} must be 0 or 1, got {values[bad[0]]!r}",
                row=int(bad[0]),
                column=col,
            )

    assessed = frame[ASSESSED].to_numpy(dtype=float)
    passed = frame[PASSED].to_numpy(dtype=float)
    bad = np.flatnonzero((assessed == 0) & (passed == 1))
    if bad.size:
        raise DataError(f"Row {bad[0]}: passed without assessed", row=int(bad[0]), column=PASSED)
    bad = np.flatnonzero((assessed == 1) & np.isnan(passed))
    if bad.size:
        raise DataError(f"Row {bad[0]}: assessed unit has no passed value", row=int(bad[0]), column=PASSED)
    bad = np.flatnonzero(~np.isnan(passed) & ~np.isin(passed, (0.0, 1.0)))
    if bad.size:
        raise DataError(f"Row {bad[0]}: passed must be 0 or 1", row=int(bad[0]), column=PASSED)


def build_table(
    frame: pd.DataFrame,
    numeric: Sequence[str],
    categorical: Sequence[str],
    reference_group: str = DEFAULT_REFERENCE_GROUP,
) -> CohortTable:
    """Validate a canonical frame and freeze it into a CohortTable."""
    frame = frame.reset_index(drop=True).copy()
    if UNIT_ID not in frame:
        frame.insert(0, UNIT_ID, [f"row{i}" for i in range(len(frame))])
    for col in (UNIT_ID, GROUP, STRATUM, COHORT):
        frame[col] = frame[col].where(frame[col].isna(), frame[col].astype(str))
    validate_frame(frame)
    frame[DECISION] = frame[DECISION].astype(np.int8)
    frame[ASSESSED] = frame[ASSESSED].astype(np.int8)
    frame[PASSED] = frame[PASSED].astype(float)
    for col in numeric:
        frame[col] = frame[col].astype(float)
    for col in categorical:
        frame[col] = frame[col].where(frame[col].isna(), frame[col].astype(str))
    levels = freeze_levels(frame, categorical, reference_group)
    return CohortTable(
        frame=frame,
        numeric=tuple(numeric),
        categorical=tuple(categorical),
        levels=levels,
        reference_group=reference_group,
    )


# ---------------------------------------------------------------------------
# Information status
# ---------------------------------------------------------------------------

def complete_mask(table: CohortTable) -> np.ndarray:
    return (table.decision == 1) & (table.assessed == 1)


def classify_information(table: CohortTable) -> np.ndarray:
    """Per-unit status: Complete iff decision = 1 and assessed = 1."""
    return np.array(
        [InformationStatus.COMPLETE if c else InformationStatus.INCOMPLETE for c in complete_mask(table)],
        dtype=object,
    )


def complete_units(table: CohortTable) -> CohortTable:
    return table.take(np.flatnonzero(complete_mask(table)))


def information_table(table: CohortTable) -> pd.DataFrame:
    """Counts of the four (decision, assessed) combinations, overall and per group."""
    frame = table.frame
    rows = []
    for decision in (1, 0):
        for assessed in (1, 0):
            mask = (frame[DECISION] == decision) & (frame[ASSESSED] == assessed)
            row = {
                "decision": decision,
                "assessed": assessed,
                "status": (
                    InformationStatus.COMPLETE if decision == 1 and assessed == 1
                    else InformationStatus.INCOMPLETE
                ).value,
                "count": int(mask.sum()),
            }
            for g in table.groups:
                row[f"count_{g}"] = int((mask & (frame[GROUP] == g)).sum())
            rows.append(row)
    return pd.DataFrame(rows)


# ---------------------------------------------------------------------------
# Filtering and splitting
# ---------------------------------------------------------------------------

def filter_units(table: CohortTable, predicate: Callable[[pd.DataFrame], pd.Series | np.ndarray]) -> CohortTable:
    """Keep units for which `predicate(frame)` is true."""
    mask = np.asarray(predicate(table.frame), dtype=bool)
    if mask.shape != (len(table),):
        raise ConfigError("Filter predicate must return one boolean per unit")
    return table.take(np.flatnonzero(mask))


def split_holdout(table: CohortTable, fraction: float, seed: int) -> tuple[CohortTable, CohortTable]:
    """Reproducible disjoint split into (train, holdout) with `fraction` in train."""
    n = len(table)
    if n < 2:
        raise DataError("Cannot split a table with fewer than 2 units")
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"Split fraction must lie in (0, 1), got {fraction}")
    n_train = int(np.clip(round(fraction * n), 1, n - 1))
    order = np.random.default_rng(seed).permutation(n)
    return table.take(np.sort(order[:n_train])), table.take(np.sort(order[n_train:]))


# ---------------------------------------------------------------------------
# Imputation
# ---------------------------------------------------------------------------

def impute_means(table: CohortTable) -> CohortTable:
    """Fill numeric gaps with within-cohort means; categorical gaps become MISSING_LEVEL.

    Means recorded on the table are reused when present, so applying this twice
    equals applying it once.
    """
    if table.imputation is not None:
        return apply_imputation(table, table.imputation)

    frame = table.frame
    means = ImputationMeans()
    for col in table.numeric:
        observed = frame[col].notna()
        by_cohort: dict[str, float] = {}
        for cohort in table.levels[COHORT]:
            in_cohort = frame[COHORT] == cohort
            if not (observed & in_cohort).any():
                raise DataError(
                    f"Column {col!r} is entirely missing in cohort {cohort!r}",
                    column=col,
                )
            by_cohort[cohort] = float(frame.loc[observed & in_cohort, col].mean())
        means.by_cohort[col] = by_cohort
        means.pooled[col] = float(frame.loc[observed, col].mean())
    return apply_imputation(table, means)


def apply_imputation(table: CohortTable, means: ImputationMeans) -> CohortTable:
    """Fill gaps using previously recorded means (pooled mean for unseen cohorts)."""
    frame = table.frame.copy()
    for col in table.numeric:
        missing = frame[col].isna()
        if missing.any():
            fill = frame.loc[missing, COHORT].map(means.by_cohort.get(col, {}))
            fill = fill.fillna(means.pooled[col])
            frame.loc[missing, col] = fill.astype(float)

    levels = dict(table.levels)
    for col in table.categorical:
        missing = frame[col].isna()
        frame[col] = frame[col].fillna(MISSING_LEVEL)
        if missing.any() and MISSING_LEVEL not in levels[col]:
            levels[col] = (*levels[col], MISSING_LEVEL)
    return table.with_frame(frame, levels=levels, imputation=means)
