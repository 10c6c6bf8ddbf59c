"""Tests for cross-validated hyperparameter selection."""

from __future__ import annotations

import numpy as np
import pytest
from pydantic import ValidationError

from prepadj.core.exceptions import DegenerateTargetError
from prepadj.dataset.table import complete_units
from prepadj.prepmodel.selection import HyperGrid, cv_folds, cv_select, fit_selected
from tests.conftest import make_table


@pytest.fixture(scope="module")
def train():
    return complete_units(make_table(n=1500, seed=9))


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------

def test_default_grid_size() -> None:
    assert len(HyperGrid().points()) == 72


@pytest.mark.parametrize("field", ["folds", "rounds", "patience"])
def test_grid_rejects_small_integers(field: str) -> None:
    with pytest.raises(ValidationError):
        HyperGrid(**{field: 0})


def test_grid_rejects_empty_axis() -> None:
    with pytest.raises(ValidationError):
        HyperGrid(eta=[])


# ---------------------------------------------------------------------------
# Folds
# ---------------------------------------------------------------------------

def test_folds_partition_with_both_classes() -> None:
    y = np.array([0, 1] * 20, dtype=float)
    parts = cv_folds(y, 4, seed=0)
    joined = np.sort(np.concatenate(parts))
    assert np.array_equal(joined, np.arange(40))
    for p in parts:
        assert set(y[p]) == {0.0, 1.0}


def test_folds_deterministic() -> None:
    y = np.array([0, 1, 1] * 10, dtype=float)
    a = cv_folds(y, 3, seed=5)
    b = cv_folds(y, 3, seed=5)
    assert all(np.array_equal(x, z) for x, z in zip(a, b))


def test_folds_impossible_raises() -> None:
    y = np.zeros(20)
    y[0] = 1.0
    with pytest.raises(DegenerateTargetError):
        cv_folds(y, 5, seed=0)


# ---------------------------------------------------------------------------
# Selection
# ---------------------------------------------------------------------------

def test_selection_prefers_learning_point(train) -> None:
    grid = HyperGrid(
        max_depth=[2], eta=[0.1], min_child_weight=[1.0, 1e9],
        gamma=[0.0], max_delta_step=[0.0], folds=3, rounds=20, patience=5,
    )
    result = cv_select(train, grid, seed=0)
    assert result.best.min_child_weight == 1.0
    by_weight = {row.params.min_child_weight: row for row in result.table}
    assert by_weight[1e9].mean_auc == pytest.approx(0.5)
    assert by_weight[1.0].mean_auc > 0.5
    assert len(by_weight[1.0].fold_auc) == 3


def test_ties_break_to_shallower_then_slower(train) -> None:
    grid = HyperGrid(
        max_depth=[4, 2], eta=[0.3, 0.1], min_child_weight=[1e9],
        gamma=[0.0], max_delta_step=[0.0], folds=2, rounds=5, patience=2,
    )
    result = cv_select(train, grid, seed=0)
    assert (result.best.max_depth, result.best.eta) == (2, 0.1)
    assert result.best_rounds == 1


def test_threads_do_not_change_result(train) -> None:
    grid = HyperGrid(
        max_depth=[1, 2], eta=[0.3], min_child_weight=[1.0],
        gamma=[0.0], max_delta_step=[0.0], folds=2, rounds=10, patience=3,
    )
    serial = cv_select(train, grid, seed=1, threads=1)
    parallel = cv_select(train, grid, seed=1, threads=4)
    assert [r.model_dump() for r in serial.table] == [r.model_dump() for r in parallel.table]
    assert serial.best == parallel.best


def test_fit_selected_records_cv_table(train) -> None:
    grid = HyperGrid(
        max_depth=[2], eta=[0.3], min_child_weight=[1.0],
        gamma=[0.0], max_delta_step=[0.0], folds=2, rounds=10, patience=3,
    )
    model = fit_selected(train, grid, seed=0)
    result = cv_select(train, grid, seed=0)
    assert len(model.report.cv_table) == 1
    assert model.report.rounds_used == result.best_rounds
    assert model.report.n_train == len(train)
