"""Two-copy augmentation of the cohort and fractional-response re-estimation."""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator
from scipy.special import expit

from prepadj.core.constants import (
    DEFAULT_THETA,
    FRACTIONAL_OUTCOME,
    GROUP,
    MU_TILDE,
    STRATUM,
    THETA_CAP_TOL,
    U,
    WEIGHT,
)
from prepadj.core.exceptions import DataError
from prepadj.dataset.table import CohortTable
from prepadj.glm.design import DesignSpec
from prepadj.glm.irls import AdjustedFit, fit_logistic
from prepadj.sensitivity.solvers import posterior_u, solve_beta, solve_gamma



class SensitivityParams(BaseModel):
    """One confounder scenario. q_alt is shared by every non-reference group."""

    q_ref: float = Field(0.0, ge=0.0, le=1.0)
    q_alt: float = Field(0.0, ge=0.0, le=1.0)
    alpha: float = 0.0
    delta: float = 0.0
    theta_cap: float = Field(DEFAULT_THETA, ge=0.0)

    @model_validator(mode="after")
    def _within_cap(self) -> SensitivityParams:
        for name in ("alpha", "delta"):
            if abs(getattr(self, name)) > self.theta_cap + THETA_CAP_TOL:
                raise ValueError(f"|{name}| = {abs(getattr(self, name)):.4f} exceeds theta_cap {self.theta_cap:.4f}")
        return self

    @property
    def is_zero(self) -> bool:
        return self.alpha == 0.0 and self.delta == 0.0

    def prevalence(self, groups: np.ndarray, reference_group: str) -> np.ndarray:
        return np.where(groups == reference_group, self.q_ref, self.q_alt)


@dataclass(frozen=True)
class SolvedNuisance:
    gamma: np.ndarray
    beta: np.ndarray
    posterior_u: np.ndarray
    q: np.ndarray


class AugmentedRow(NamedTuple):
    unit: int
    u: int
    weight: float
    fractional_outcome: float
    mu_tilde: float


@dataclass(frozen=True)
class AugmentedData:
    """Rows 0..n-1 are the u = 0 copies, rows n..2n-1 the u = 1 copies of the same units."""

    frame: pd.DataFrame
    levels: dict[str, tuple[str, ...]]

    def __len__(self) -> int:
        return len(self.frame)

    def rows(self) -> Iterator[AugmentedRow]:
        cols = ["unit", U, WEIGHT, FRACTIONAL_OUTCOME, MU_TILDE]
        for values in self.frame[cols].itertuples(index=False, name=None):
            yield AugmentedRow(int(values[0]), int(values[1]), *map(float, values[2:]))


def solve_nuisance(
    table: CohortTable,
    propensity: np.ndarray,
    mu: np.ndarray,
    params: SensitivityParams,
) -> SolvedNuisance:
    """gamma from the propensity, posterior of u among deciders, then beta from mu."""
    propensity = np.asarray(propensity, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if propensity.shape != (len(table),) or mu.shape != (len(table),):
        raise DataError("Propensity and preparedness must have one value per unit")
    q = params.prevalence(table.group, table.reference_group)
    gamma = solve_gamma(propensity, q, params.alpha)
    w = posterior_u(gamma, params.alpha, q)
    beta = solve_beta(mu, w, params.delta)
    return SolvedNuisance(gamma=gamma, beta=beta, posterior_u=w, q=q)


def augment(
    table: CohortTable,
    propensity: np.ndarray,
    mu: np.ndarray,
    params: SensitivityParams,
) -> AugmentedData:
    """Two weighted copies per unit, one per value of the hypothetical confounder."""
    nuisance = solve_nuisance(table, propensity, mu, params)
    n = len(table)
    base = pd.DataFrame({
        "unit": np.arange(n),
        GROUP: table.group,
        STRATUM: table.stratum,
    })
    copies = []
    for u in (0, 1):
        part = base.copy()
        part[U] = u
        part[WEIGHT] = nuisance.q if u else 1.0 - nuisance.q
        part[FRACTIONAL_OUTCOME] = expit(nuisance.gamma + u * params.alpha)
        part[MU_TILDE] = expit(nuisance.beta + u * params.delta)
        copies.append(part)
    frame = pd.concat(copies, ignore_index=True)
    return AugmentedData(frame=frame, levels={GROUP: table.groups, STRATUM: table.strata})


def reestimate(
    augmented: AugmentedData,
    *,
    exclude_strata: Sequence[str] = (),
    ridge: float = 0.0,
) -> AdjustedFit:
    """Weighted fractional logit: fractional_outcome ~ group + logit(mu_tilde) + stratum."""
    spec = DesignSpec(
        outcome=FRACTIONAL_OUTCOME,
        prep=MU_TILDE,
        weights=WEIGHT,
        ridge=ridge,
        exclude_strata=list(exclude_strata),
    )
    return fit_logistic(augmented.frame, spec, augmented.levels)
