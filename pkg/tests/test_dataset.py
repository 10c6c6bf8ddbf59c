"""Tests for cohort loading, information status, imputation and splitting."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from prepadj.core.constants import MISSING_LEVEL
from prepadj.core.exceptions import ConfigError, DataError, SchemaError
from prepadj.dataset.io import load_csv, schema_for, write_csv
from prepadj.dataset.schema import ColumnSchema
from prepadj.dataset.table import (
    InformationStatus,
    build_table,
    classify_information,
    complete_units,
    filter_units,
    impute_means,
    information_table,
    split_holdout,
)
from tests.conftest import make_table

HEADER = "id,race,school,enrolled,took_exam,passed_exam,year,gpa,lang\n"


def _schema(**covariates: str) -> ColumnSchema:
    return ColumnSchema(
        unit_id="id",
        group="race",
        stratum="school",
        decision="enrolled",
        assessed="took_exam",
        passed="passed_exam",
        cohort="year",
        covariates=covariates or {"gpa": "numeric", "lang": "categorical"},
    )


def _write(tmp_path: Path, rows: list[str], header: str = HEADER) -> Path:
    path = tmp_path / "cohort.csv"
    path.write_text(header + "\n".join(rows) + "\n")
    return path


def _frame(**columns) -> pd.DataFrame:
    n = len(next(iter(columns.values())))
    base = {
        "group": ["White"] * n,
        "stratum": ["S1"] * n,
        "decision": [1] * n,
        "assessed": [1] * n,
        "passed": [1.0] * n,
        "cohort": ["c1"] * n,
    }
    base.update(columns)
    return pd.DataFrame(base)


# ---------------------------------------------------------------------------
# load_csv
# ---------------------------------------------------------------------------

def test_load_csv_accepts_complete_row(tmp_path: Path) -> None:
    path = _write(tmp_path, ["1,White,S1,1,1,1,2011,3.2,en", "2,Black,S1,0,0,NA,2011,2.9,es"])
    table = load_csv(path, _schema())
    assert len(table) == 2
    assert list(table.unit_ids) == ["1", "2"]
    assert table.groups == ("White", "Black")
    assert classify_information(table)[0] == InformationStatus.COMPLETE
    assert np.isnan(table.passed[1])


def test_load_csv_rejects_passed_without_assessed(tmp_path: Path) -> None:
    path = _write(tmp_path, ["1,White,S1,1,1,1,2011,3.2,en", "2,White,S1,1,0,1,2011,3.0,en"])
    with pytest.raises(DataError, match="passed without assessed") as exc:
        load_csv(path, _schema())
    assert exc.value.row == 1


def test_load_csv_unknown_column_type_names_column(tmp_path: Path) -> None:
    rows = [f"{i},White,S1,1,1,1,2011,3.0,en" for i in range(10)]
    path = _write(tmp_path, rows)
    with pytest.raises(SchemaError, match="gpa") as exc:
        load_csv(path, _schema(gpa="ordinal", lang="categorical"))
    assert exc.value.column == "gpa"


def test_load_csv_missing_required_column(tmp_path: Path) -> None:
    header = "id,race,school,enrolled,took_exam,year,gpa,lang\n"
    path = _write(tmp_path, ["1,White,S1,1,1,2011,3.2,en"], header=header)
    with pytest.raises(SchemaError, match="passed_exam"):
        load_csv(path, _schema())


def test_load_csv_unparseable_cell_reports_row(tmp_path: Path) -> None:
    path = _write(tmp_path, ["1,White,S1,1,1,1,2011,3.2,en", "2,White,S1,1,1,0,2011,abc,en"])
    with pytest.raises(DataError, match="abc") as exc:
        load_csv(path, _schema())
    assert exc.value.row == 1
    assert exc.value.column == "gpa"


def test_load_csv_untyped_column_rejected(tmp_path: Path) -> None:
    path = _write(tmp_path, ["1,White,S1,1,1,1,2011,3.2,en"])
    with pytest.raises(SchemaError, match="lang"):
        load_csv(path, _schema(gpa="numeric"))


def test_load_csv_missing_file(tmp_path: Path) -> None:
    with pytest.raises(DataError, match="not found"):
        load_csv(tmp_path / "nope.csv", _schema())


def test_group_cannot_be_covariate(tmp_path: Path) -> None:
    path = _write(tmp_path, ["1,White,S1,1,1,1,2011,3.2,en"])
    with pytest.raises(SchemaError):
        load_csv(path, _schema(race="categorical", gpa="numeric", lang="categorical"))


def test_two_roles_on_one_column_rejected(tmp_path: Path) -> None:
    path = _write(tmp_path, ["1,White,S1,1,1,1,2011,3.2,en"])
    schema = _schema().model_copy(update={"stratum": "race"})
    with pytest.raises(SchemaError, match="same source column") as exc:
        load_csv(path, schema)
    assert exc.value.column == "race"
    assert exc.value.exit_code == 2


def test_unit_id_sharing_a_role_column_rejected() -> None:
    with pytest.raises(SchemaError, match="'year'"):
        _schema().model_copy(update={"unit_id": "year"}).check()


def test_missing_reference_group_rejected() -> None:
    with pytest.raises(SchemaError, match="Reference group"):
        build_table(_frame(group=["Black", "Asian"]), [], [], "White")


def test_missing_stratum_rejected() -> None:
    with pytest.raises(DataError, match="missing stratum"):
        build_table(_frame(stratum=["S1", None]), [], [])


def test_write_csv_reloads_identically(tmp_path: Path, small_table) -> None:
    path = write_csv(small_table, tmp_path / "out.csv")
    again = load_csv(path, schema_for(small_table))
    pd.testing.assert_frame_equal(
        again.frame.reset_index(drop=True), small_table.frame.reset_index(drop=True), check_dtype=False,
    )
    assert again.levels == small_table.levels


# ---------------------------------------------------------------------------
# Information status
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    ("decision", "assessed", "expected"),
    [
        (1, 1, InformationStatus.COMPLETE),
        (0, 1, InformationStatus.INCOMPLETE),
        (1, 0, InformationStatus.INCOMPLETE),
        (0, 0, InformationStatus.INCOMPLETE),
    ],
)
def test_classify_information(decision: int, assessed: int, expected: InformationStatus) -> None:
    passed = 0.0 if assessed else np.nan
    table = build_table(_frame(decision=[decision], assessed=[assessed], passed=[passed]), [], [])
    assert classify_information(table)[0] == expected


def test_information_table_partitions_units(small_table) -> None:
    info = information_table(small_table)
    assert info["count"].sum() == len(small_table)
    group_cols = [c for c in info.columns if c.startswith("count_")]
    assert info[group_cols].to_numpy().sum() == len(small_table)
    complete = info[info["status"] == "Complete"]
    assert int(complete["count"].iloc[0]) == len(complete_units(small_table))


def test_filter_units(small_table) -> None:
    kept = filter_units(small_table, lambda f: f["x1"] > 0)
    assert len(kept) == int((small_table.frame["x1"] > 0).sum())
    assert kept.levels == small_table.levels


def test_filter_units_rejects_bad_predicate(small_table) -> None:
    with pytest.raises(ConfigError):
        filter_units(small_table, lambda f: np.ones(3, dtype=bool))


# ---------------------------------------------------------------------------
# Imputation
# ---------------------------------------------------------------------------

def test_impute_mean_of_observed() -> None:
    table = build_table(_frame(x=[1.0, np.nan, 3.0]), ["x"], [])
    assert impute_means(table).frame["x"].tolist() == [1.0, 2.0, 3.0]


def test_impute_uses_cohort_mean() -> None:
    table = build_table(
        _frame(x=[1.0, 3.0, 9.0, 11.0, np.nan], cohort=["A", "A", "B", "B", "B"]),
        ["x"],
        [],
    )
    imputed = impute_means(table)
    assert imputed.frame["x"].iloc[4] == 10.0
    assert imputed.imputation.by_cohort["x"] == {"A": 2.0, "B": 10.0}


def test_impute_all_missing_in_cohort_names_column_and_cohort() -> None:
    table = build_table(_frame(x=[1.0, np.nan], cohort=["A", "B"]), ["x"], [])
    with pytest.raises(DataError, match="'x'.*'B'"):
        impute_means(table)


def test_impute_is_idempotent() -> None:
    table = build_table(_frame(x=[1.0, np.nan, 4.0, np.nan], cohort=["A", "A", "B", "B"]), ["x"], [])
    once = impute_means(table)
    twice = impute_means(once)
    pd.testing.assert_frame_equal(once.frame, twice.frame)


def test_impute_categorical_becomes_missing_level() -> None:
    table = build_table(_frame(kind=["a", None, "b"]), [], ["kind"])
    imputed = impute_means(table)
    assert imputed.frame["kind"].tolist() == ["a", MISSING_LEVEL, "b"]
    assert MISSING_LEVEL in imputed.levels["kind"]


# ---------------------------------------------------------------------------
# Holdout split
# ---------------------------------------------------------------------------

def test_split_ten_units_nine_one_and_deterministic() -> None:
    table = make_table(n=10)
    train, hold = split_holdout(table, 0.9, seed=3)
    assert (len(train), len(hold)) == (9, 1)
    train2, hold2 = split_holdout(table, 0.9, seed=3)
    assert list(train.unit_ids) == list(train2.unit_ids)
    assert list(hold.unit_ids) == list(hold2.unit_ids)


def test_split_half() -> None:
    train, hold = split_holdout(make_table(n=100), 0.5, seed=1)
    assert (len(train), len(hold)) == (50, 50)
    assert set(train.unit_ids).isdisjoint(hold.unit_ids)
    assert len(set(train.unit_ids) | set(hold.unit_ids)) == 100


def test_split_varies_with_seed() -> None:
    table = make_table(n=50)
    partitions = {tuple(split_holdout(table, 0.5, seed=s)[1].unit_ids) for s in range(20)}
    assert len(partitions) >= 19


def test_split_needs_two_units() -> None:
    with pytest.raises(DataError):
        split_holdout(make_table(n=1), 0.9, seed=0)
