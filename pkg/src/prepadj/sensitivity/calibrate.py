"""Suggest the cap on confounder effects from a strong observed covariate."""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel

from prepadj.core.constants import DECISION, PASSED, THETA_FLOOR_ODDS, THETA_SLACK
from prepadj.core.exceptions import ConfigError, DataError
from prepadj.dataset.table import CohortTable, complete_mask
from prepadj.glm.design import DesignSpec
from prepadj.glm.irls import fit_logistic

BENCHMARK_HIGH = "benchmark_high"


class ThetaCalibration(BaseModel):
    benchmark: str
    threshold: float
    coef_decision: float
    coef_passage: float
    odds_ratio_max: float
    theta: float


def round_theta(odds_ratio: float, slack: float = THETA_SLACK) -> float:
    """log of the odds ratio rounded up to an integer, never below log 2."""
    return math.log(max(THETA_FLOOR_ODDS, math.ceil(odds_ratio - slack)))


def calibrate_theta(
    table: CohortTable,
    benchmark: str,
    companions: Sequence[str] = (),
    *,
    slack: float = THETA_SLACK,
) -> ThetaCalibration:
    """Binarize `benchmark` at mean + 1 SD and read off its log-odds effect on decision and passage.

    The decision regression uses every unit, the passage regression only
    Complete units; both adjust for stratum fixed effects and `companions`.
    """
    if benchmark not in table.numeric:
        raise ConfigError(f"Benchmark {benchmark!r} must be a numeric covariate")
    x = table.frame[benchmark].to_numpy(dtype=float)
    if np.isnan(x).any():
        raise DataError(f"Benchmark {benchmark!r} has missing values; impute first", column=benchmark)
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    if not sd > 0:
        raise DataError(f"Benchmark {benchmark!r} is constant", column=benchmark)
    threshold = float(np.mean(x)) + sd

    frame = table.frame.copy()
    frame[BENCHMARK_HIGH] = (x > threshold).astype(float)
    covariates = [*companions, BENCHMARK_HIGH]

    decision_fit = fit_logistic(frame, DesignSpec(outcome=DECISION, group=False, covariates=covariates), table.levels)
    complete = frame[complete_mask(table)]
    passage_fit = fit_logistic(complete, DesignSpec(outcome=PASSED, group=False, covariates=covariates), table.levels)

    try:
        coef_i = decision_fit.coefficients[BENCHMARK_HIGH]
        coef_ii = passage_fit.coefficients[BENCHMARK_HIGH]
    except KeyError as e:
        raise DataError(f"Benchmark {benchmark!r} is collinear with the adjustment terms", column=benchmark) from e
    odds_ratio = math.exp(max(abs(coef_i), abs(coef_ii)))
    return ThetaCalibration(
        benchmark=benchmark,
        threshold=threshold,
        coef_decision=coef_i,
        coef_passage=coef_ii,
        odds_ratio_max=odds_ratio,
        theta=round_theta(odds_ratio, slack),
    )
