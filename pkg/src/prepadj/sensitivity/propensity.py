"""Decision propensity Pr(decision = 1 | group, covariates) for the confounder solves."""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np
import pandas as pd

from prepadj.core.constants import DECISION, DEFAULT_TRAIN_FRACTION, GROUP, STRATUM
from prepadj.core.exceptions import DegenerateTargetError
from prepadj.dataset.table import CohortTable, split_holdout
from prepadj.prepmodel.boosting import PreparednessModel, predict_mu
from prepadj.prepmodel.metrics import auc, calibration_report
from prepadj.prepmodel.selection import HyperGrid, fit_selected


@dataclass(frozen=True, eq=False)
class PropensityFit:
    propensity: np.ndarray
    holdout_auc: float
    model: PreparednessModel
    calibration_by_group: pd.DataFrame
    calibration_by_stratum: pd.DataFrame


def fit_propensity(
    table: CohortTable,
    grid: HyperGrid,
    seed: int,
    *,
    features: list[str] | None = None,
    fraction: float = DEFAULT_TRAIN_FRACTION,
    threads: int = 1,
) -> PropensityFit:
    """Boosted decision model on all units; group is a feature here, unlike the preparedness model.

    AUC and group calibration come from the held-out split, stratum calibration
    from the full table.
    """
    decision = table.decision
    if decision.min() == decision.max():
        raise DegenerateTargetError(f"degenerate target: every decision value is {int(decision[0])}")
    if features is None:
        features = [GROUP, *table.covariates, STRATUM]

    train, holdout = split_holdout(table, fraction, seed)
    print(f"  Fitting decision propensity on {len(train)} unit(s)...", file=sys.stderr)
    model = fit_selected(
        train, grid, seed, target=DECISION, features=features, threads=threads, allow_group=True,
    )

    held = predict_mu(model, holdout)
    held_auc = auc(held, holdout.decision)
    model.report.holdout_auc = held_auc

    propensity = predict_mu(model, table)
    return PropensityFit(
        propensity=propensity,
        holdout_auc=held_auc,
        model=model,
        calibration_by_group=calibration_report(held, holdout.decision, holdout.group),
        calibration_by_stratum=calibration_report(propensity, decision, table.stratum),
    )
