"""CSV ingestion and emission for cohort tables."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from prepadj.core.constants import (
    ASSESSED,
    COHORT,
    DECISION,
    GROUP,
    PASSED,
    ROLE_COLUMNS,
    STRATUM,
    UNIT_ID,
)
from prepadj.core.exceptions import DataError, SchemaError
from prepadj.dataset.schema import ColumnSchema
from prepadj.dataset.table import CohortTable, build_table

NA_VALUES = ["", "NA"]


def _parse_numeric(raw: pd.Series, column: str) -> pd.Series:
    parsed = pd.to_numeric(raw, errors="coerce")
    bad = np.flatnonzero((raw.notna() & parsed.isna()).to_numpy())
    if bad.size:
        row = int(bad[0])
        raise DataError(
            f"Row {row}: cannot parse {raw.iloc[row]!r} in column {column!r} as a number",
            row=row,
            column=column,
        )
    return parsed.astype(float)


def load_csv(path: Path, schema: ColumnSchema) -> CohortTable:
    """Read a header-first CSV, map roles to canonical names and validate every unit."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"File not found: {path}")
    schema.check()

    raw = pd.read_csv(path, dtype=str, keep_default_na=False, na_values=NA_VALUES)

    missing = [c for c in schema.required_columns() if c not in raw.columns]
    if schema.unit_id and schema.unit_id not in raw.columns and schema.unit_id != UNIT_ID:
        missing.append(schema.unit_id)
    if missing:
        raise SchemaError(f"Missing required column(s): {', '.join(missing)}", column=missing[0])

    roles = schema.role_map()
    for col in raw.columns:
        if col not in roles and col not in schema.covariates:
            raise SchemaError(
                f"Column {col!r} has no role and no covariate type in the schema",
                column=col,
            )
    for col in schema.covariates:
        if col not in raw.columns:
            raise SchemaError(f"Covariate column {col!r} not found in {path.name}", column=col)

    frame = raw.rename(columns={src: dst for src, dst in roles.items() if src in raw.columns})
    for col in (DECISION, ASSESSED, PASSED):
        frame[col] = _parse_numeric(frame[col], roles_inverse(roles)[col])
    for col in schema.numeric:
        frame[col] = _parse_numeric(frame[col], col)

    ordered = [c for c in ROLE_COLUMNS if c in frame.columns] + list(schema.covariates)
    return build_table(frame[ordered], schema.numeric, schema.categorical, schema.reference_group)


def roles_inverse(roles: dict[str, str]) -> dict[str, str]:
    return {dst: src for src, dst in roles.items()}


def schema_for(table: CohortTable) -> ColumnSchema:
    """Schema describing a table written by write_csv."""
    covariates = {c: "numeric" for c in table.numeric}
    covariates.update({c: "categorical" for c in table.categorical})
    return ColumnSchema(covariates=covariates, reference_group=table.reference_group)


def write_csv(table: CohortTable, path: Path) -> Path:
    """Write the table in canonical layout; flags as integers, gaps as NA."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = table.frame.copy()
    frame[PASSED] = frame[PASSED].astype("Int64")
    columns = [UNIT_ID, GROUP, STRATUM, DECISION, ASSESSED, PASSED, COHORT, *table.covariates]
    frame[columns].to_csv(path, index=False, na_rep="NA", lineterminator="\n")
    return path
