"""Shared fixtures: small hand-built cohorts and cached synthetic draws."""

from __future__ import annotations

import numpy as np
import pandas as pd
import pytest

from prepadj.dataset.synthetic import SyntheticTruth, synthetic_draw
from prepadj.dataset.table import CohortTable, build_table


def make_table(
    n: int = 200,
    seed: int = 0,
    groups: tuple[str, ...] = ("White", "Black", "Asian"),
    n_strata: int = 4,
) -> CohortTable:
    """Random cohort with two numerics, one categorical and a logistic decision."""
    rng = np.random.default_rng(seed)
    x1 = rng.standard_normal(n)
    x2 = rng.standard_normal(n)
    group = np.array(groups, dtype=object)[np.arange(n) % len(groups)]
    stratum = np.array([f"S{i}" for i in range(n_strata)], dtype=object)[rng.permutation(n) % n_strata]
    decision = (rng.random(n) < 1 / (1 + np.exp(-(0.3 * x1 - 0.2)))).astype(int)
    assessed = np.where(decision == 1, (rng.random(n) < 0.9).astype(int), 0)
    passed = np.where(assessed == 1, (rng.random(n) < 1 / (1 + np.exp(-x1))).astype(float), np.nan)
    frame = pd.DataFrame({
        "unit_id": [f"u{i}" for i in range(n)],
        "group": group,
        "stratum": stratum,
        "decision": decision,
        "assessed": assessed,
        "passed": passed,
        "cohort": np.where(rng.random(n) < 0.5, "c1", "c2"),
        "x1": x1,
        "x2": x2,
        "kind": np.array(["a", "b", "c"], dtype=object)[rng.integers(0, 3, n)],
    })
    return build_table(frame, ["x1", "x2"], ["kind"], groups[0])


@pytest.fixture()
def small_table() -> CohortTable:
    return make_table()


@pytest.fixture(scope="session")
def null_draw():
    """Synthetic cohort with no group effects and no confounding."""
    truth = SyntheticTruth(seed=11)
    return synthetic_draw(truth, n_units=6000, n_strata=10, n_covariates=6)

