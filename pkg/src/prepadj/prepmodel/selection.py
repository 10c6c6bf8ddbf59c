"""Hyperparameter grid search by k-fold cross-validated AUC."""

from __future__ import annotations

import itertools
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, Field, field_validator

from prepadj.core.constants import (
    DEFAULT_FOLDS,
    DEFAULT_GRID,
    DEFAULT_PATIENCE,
    DEFAULT_ROUNDS,
    PASSED,
)
from prepadj.core.exceptions import DegenerateTargetError
from prepadj.dataset.table import CohortTable
from prepadj.prepmodel.boosting import BoostParams, CvRow, PreparednessModel, fit_boosted


class HyperGrid(BaseModel):
    max_depth: list[int] = Field(default_factory=lambda: [int(v) for v in DEFAULT_GRID["max_depth"]])
    eta: list[float] = Field(default_factory=lambda: list(DEFAULT_GRID["eta"]))
    min_child_weight: list[float] = Field(default_factory=lambda: list(DEFAULT_GRID["min_child_weight"]))
    gamma: list[float] = Field(default_factory=lambda: list(DEFAULT_GRID["gamma"]))
    max_delta_step: list[float] = Field(default_factory=lambda: list(DEFAULT_GRID["max_delta_step"]))
    folds: int = DEFAULT_FOLDS
    rounds: int = DEFAULT_ROUNDS
    patience: int = DEFAULT_PATIENCE

    @field_validator("max_depth", "eta", "min_child_weight", "gamma", "max_delta_step")
    @classmethod
    def _nonempty(cls, v: list) -> list:
        if not v:
            raise ValueError("grid axes must be nonempty")
        return v

    @field_validator("folds")
    @classmethod
    def _folds(cls, v: int) -> int:
        if v < 2:
            raise ValueError("folds must be at least 2")
        return v

    @field_validator("rounds", "patience")
    @classmethod
    def _positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    def points(self) -> list[BoostParams]:
        return [
            BoostParams(max_depth=d, eta=e, min_child_weight=m, gamma=g, max_delta_step=s)
            for d, e, m, g, s in itertools.product(
                self.max_depth, self.eta, self.min_child_weight, self.gamma, self.max_delta_step,
            )
        ]


@dataclass(frozen=True)
class CvResult:
    best: BoostParams
    best_rounds: int
    table: list[CvRow]


def _both_classes(y: np.ndarray) -> bool:
    return y.size > 0 and y.min() != y.max()


def cv_folds(y: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Random k-fold partition; reshuffled once if any fold (or its complement) has one class."""
    rng = np.random.default_rng(seed)
    for _ in range(2):
        parts = [np.sort(p) for p in np.array_split(rng.permutation(y.size), folds)]
        ok = all(
            _both_classes(y[p]) and _both_classes(np.delete(y, p)) for p in parts
        )
        if ok:
            return parts
    raise DegenerateTargetError(
        f"Cannot form {folds} folds with both classes in every fold (n={y.size}, positives={int(y.sum())})"
    )


def _selection_key(row: CvRow) -> tuple[float, int, float]:
    # highest mean AUC; ties -> smaller max_depth, then smaller eta
    return (-row.mean_auc, row.params.max_depth, row.params.eta)


def cv_select(
    train: CohortTable,
    grid: HyperGrid,
    seed: int,
    *,
    target: str = PASSED,
    features: list[str] | None = None,
    threads: int = 1,
    allow_group: bool = False,
) -> CvResult:
    """Evaluate every grid point on the same folds and return the argmax of mean validation AUC."""
    y = train.frame[target].to_numpy(dtype=float)
    parts = cv_folds(y, grid.folds, seed)
    points = grid.points()
    everything = np.arange(len(train))

    def run(task: tuple[int, int]) -> tuple[float, int]:
        i, k = task
        fold_train = train.take(np.setdiff1d(everything, parts[k]))
        fold_valid = train.take(parts[k])
        model = fit_boosted(
            fold_train, points[i], grid.rounds, seed,
            target=target, features=features, valid=fold_valid,
            patience=grid.patience, allow_group=allow_group,
        )
        return model.report.valid_auc, model.report.rounds_used

    tasks = [(i, k) for i in range(len(points)) for k in range(grid.folds)]
    print(
        f"  Cross-validating {len(points)} grid point(s) x {grid.folds} folds...",
        file=sys.stderr,
    )
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = dict(zip(tasks, pool.map(run, tasks)))

    table = []
    for i, params in enumerate(points):
        fold_auc = [results[(i, k)][0] for k in range(grid.folds)]
        table.append(CvRow(
            params=params,
            fold_auc=fold_auc,
            mean_auc=float(np.mean(fold_auc)),
            best_rounds=[results[(i, k)][1] for k in range(grid.folds)],
        ))
    best = min(table, key=_selection_key)
    return CvResult(
        best=best.params,
        best_rounds=max(1, int(round(float(np.mean(best.best_rounds))))),
        table=table,
    )


def fit_selected(
    train: CohortTable,
    grid: HyperGrid,
    seed: int,
    *,
    target: str = PASSED,
    features: list[str] | None = None,
    threads: int = 1,
    allow_group: bool = False,
) -> PreparednessModel:
    """Cross-validate, then refit the chosen point on all of `train` with the mean best round count."""
    result = cv_select(
        train, grid, seed, target=target, features=features, threads=threads, allow_group=allow_group,
    )
    model = fit_boosted(
        train, result.best, result.best_rounds, seed,
        target=target, features=features, allow_group=allow_group,
    )
    model.report.cv_table = result.table
    return model
