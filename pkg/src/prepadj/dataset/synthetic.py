"""Synthetic cohorts with known ground truth.

The decision process is
    logit Pr(a = 1) = intercept + effect[group] + effect[stratum]
                      + prep_slope * logit(mu without u) + alpha * u
and the success process is mu = logistic(x . w + delta * u). Assessment taking
depends on the decision only, never on u. With alpha = delta = 0 the data
satisfy conditional ignorability by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator, model_validator
from scipy.special import expit, logit

from prepadj.core.constants import (
    ASSESSED,
    COHORT,
    DECISION,
    DEFAULT_REFERENCE_GROUP,
    GROUP,
    PASSED,
    STRATUM,
    UNIT_ID,
)
from prepadj.core.exceptions import ConfigError
from prepadj.dataset.table import CohortTable, build_table

CATEGORY_LEVELS = ("a", "b", "c")


class ConfounderTruth(BaseModel):
    prevalence: dict[str, float] = Field(default_factory=dict)
    alpha: float = 0.0
    delta: float = 0.0

    @field_validator("prevalence")
    @classmethod
    def _prevalence_in_unit_interval(cls, v: dict[str, float]) -> dict[str, float]:
        for g, q in v.items():
            if not 0.0 <= q <= 1.0:
                raise ValueError(f"prevalence for {g!r} must lie in [0, 1], got {q}")
        return v


class SyntheticTruth(BaseModel):
    """Ground-truth parameters of a generated cohort."""

    true_group_effects: dict[str, float] = Field(
        default_factory=lambda: {"White": 0.0, "Black": 0.0, "Hispanic": 0.0, "Asian": 0.0}
    )
    reference_group: str = DEFAULT_REFERENCE_GROUP
    group_shares: dict[str, float] = Field(default_factory=dict)
    prep_gap: dict[str, float] = Field(default_factory=dict)
    true_prep_slope: float = 1.0
    confounder: ConfounderTruth = Field(default_factory=ConfounderTruth)
    true_outcome_coefficients: list[float] = Field(default_factory=list)
    outcome_intercept: float = 0.0
    decision_intercept: float = -0.5
    stratum_effect_sd: float = 0.5
    stratum_effects: list[float] = Field(default_factory=list)
    assess_rate: float = 0.9
    assess_rate_unenrolled: float = 0.02
    missing_rate: float = 0.0
    n_cohorts: int = 2
    seed: int = 0

    @field_validator("assess_rate", "assess_rate_unenrolled", "missing_rate")
    @classmethod
    def _rate(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"rate must lie in [0, 1], got {v}")
        return v

    @model_validator(mode="after")
    def _groups_consistent(self) -> SyntheticTruth:
        groups = set(self.true_group_effects)
        if self.reference_group not in groups:
            raise ValueError(f"reference group {self.reference_group!r} missing from true_group_effects")
        if self.true_group_effects[self.reference_group] != 0.0:
            raise ValueError("the reference group's effect must be 0")
        for name, mapping in (("group_shares", self.group_shares), ("prep_gap", self.prep_gap),
                              ("confounder.prevalence", self.confounder.prevalence)):
            unknown = set(mapping) - groups
            if unknown:
                raise ValueError(f"{name} names unknown group(s): {sorted(unknown)}")
        if self.n_cohorts < 1:
            raise ValueError("n_cohorts must be at least 1")
        return self

    @property
    def groups(self) -> list[str]:
        rest = sorted(g for g in self.true_group_effects if g != self.reference_group)
        return [self.reference_group, *rest]

    def prevalence(self, group: str) -> float:
        return self.confounder.prevalence.get(group, 0.0)


@dataclass(frozen=True, eq=False)
class SyntheticDraw:
    """A generated cohort together with its per-unit oracle quantities."""

    table: CohortTable
    truth: SyntheticTruth
    mu: np.ndarray
    mu_without_u: np.ndarray
    p_decision: np.ndarray
    u: np.ndarray


def synthetic_draw(
    truth: SyntheticTruth,
    n_units: int,
    n_strata: int,
    n_covariates: int,
) -> SyntheticDraw:
    """Generate a cohort; everything is a pure function of the arguments."""
    if n_units < 100:
        raise ConfigError(f"n_units must be at least 100, got {n_units}")
    if n_strata < 1 or n_covariates < 1:
        raise ConfigError("n_strata and n_covariates must be positive")

    rng = np.random.default_rng(truth.seed)
    groups = truth.groups

    shares = np.array([truth.group_shares.get(g, 1.0) for g in groups], dtype=float)
    if (shares < 0).any() or shares.sum() <= 0:
        raise ConfigError("group_shares must be nonnegative and not all zero")
    group_idx = rng.choice(len(groups), size=n_units, p=shares / shares.sum())
    group = np.array(groups, dtype=object)[group_idx]

    # unequal stratum sizes
    stratum_weights = rng.lognormal(0.0, 1.0, size=n_strata)
    stratum_idx = rng.choice(n_strata, size=n_units, p=stratum_weights / stratum_weights.sum())
    stratum_names = np.array([f"S{i + 1:03d}" for i in range(n_strata)], dtype=object)

    cohort_idx = rng.integers(0, truth.n_cohorts, size=n_units)

    n_categorical = n_covariates // 3
    n_numeric = n_covariates - n_categorical
    gap = np.array([truth.prep_gap.get(g, 0.0) for g in groups])[group_idx]
    numeric = rng.standard_normal((n_units, n_numeric)) + gap[:, None]
    codes = rng.integers(0, len(CATEGORY_LEVELS), size=(n_units, n_categorical))

    weights = np.asarray(truth.true_outcome_coefficients, dtype=float)
    if weights.size == 0:
        weights = rng.uniform(0.2, 0.8, size=n_covariates)
    elif weights.size != n_covariates:
        raise ConfigError(
            f"true_outcome_coefficients has {weights.size} entries, expected {n_covariates}"
        )

    index = truth.outcome_intercept + numeric @ weights[:n_numeric]
    if n_categorical:
        index = index + (codes - 1) @ weights[n_numeric:]

    q = np.array([truth.prevalence(g) for g in groups])[group_idx]
    u = (rng.random(n_units) < q).astype(np.int8)

    mu_without_u = expit(index)
    mu = expit(index + truth.confounder.delta * u)

    stratum_effects = np.asarray(truth.stratum_effects, dtype=float)
    if stratum_effects.size == 0:
        stratum_effects = rng.normal(0.0, truth.stratum_effect_sd, size=n_strata)
    elif stratum_effects.size != n_strata:
        raise ConfigError(f"stratum_effects has {stratum_effects.size} entries, expected {n_strata}")

    group_effect = np.array([truth.true_group_effects[g] for g in groups])[group_idx]
    decision_index = (
        truth.decision_intercept
        + group_effect
        + stratum_effects[stratum_idx]
        + truth.true_prep_slope * logit(mu_without_u)
        + truth.confounder.alpha * u
    )
    p_decision = expit(decision_index)
    decision = (rng.random(n_units) < p_decision).astype(np.int8)

    assess_p = np.where(decision == 1, truth.assess_rate, truth.assess_rate_unenrolled)
    assessed = (rng.random(n_units) < assess_p).astype(np.int8)
    success = (rng.random(n_units) < mu).astype(float)
    passed = np.where(assessed == 1, success, np.nan)

    for g in groups:
        in_group = group == g
        if in_group.any() and decision[in_group].min() == decision[in_group].max():
            raise ConfigError(
                f"Degenerate synthetic config: every unit in group {g!r} has decision = "
                f"{int(decision[in_group][0])} (n={int(in_group.sum())}); "
                "adjust decision_intercept or group effects"
            )

    frame = pd.DataFrame({
        UNIT_ID: [f"u{i + 1:07d}" for i in range(n_units)],
        GROUP: group,
        STRATUM: stratum_names[stratum_idx],
        DECISION: decision,
        ASSESSED: assessed,
        PASSED: passed,
        COHORT: np.array([f"cohort{k + 1}" for k in range(truth.n_cohorts)], dtype=object)[cohort_idx],
    })
    numeric_names = [f"x{j + 1}" for j in range(n_numeric)]
    categorical_names = [f"c{j + 1}" for j in range(n_categorical)]
    if truth.missing_rate > 0:
        holes = rng.random(numeric.shape) < truth.missing_rate
        numeric = np.where(holes, np.nan, numeric)
    for j, name in enumerate(numeric_names):
        frame[name] = numeric[:, j]
    for j, name in enumerate(categorical_names):
        frame[name] = np.array(CATEGORY_LEVELS, dtype=object)[codes[:, j]]

    table = build_table(frame, numeric_names, categorical_names, truth.reference_group)
    completed = truth.model_copy(update={
        "true_outcome_coefficients": [float(w) for w in weights],
        "stratum_effects": [float(s) for s in stratum_effects],
    })
    return SyntheticDraw(
        table=table,
        truth=completed,
        mu=mu,
        mu_without_u=mu_without_u,
        p_decision=p_decision,
        u=u,
    )


def generate_synthetic(
    config: SyntheticTruth,
    n_units: int,
    n_strata: int,
    n_covariates: int,
) -> tuple[CohortTable, SyntheticTruth]:
    """Cohort table plus the completed truth record (drawn weights and stratum effects)."""
    draw = synthetic_draw(config, n_units, n_strata, n_covariates)
    return draw.table, draw.truth
