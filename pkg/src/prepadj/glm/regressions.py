"""The preparedness-adjusted regression, the three baselines, and their side-by-side table."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from enum import Enum

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy.stats import norm

from prepadj.core.constants import DECISION, GROUP, MU, STRATUM
from prepadj.core.exceptions import ConfigError, DataError
from prepadj.dataset.table import CohortTable
from prepadj.glm.design import INTERCEPT, PREP_TERM, DesignSpec
from prepadj.glm.irls import AdjustedFit, fit_logistic


class BaselineVariant(str, Enum):
    RAW = "Raw"
    TRADITIONAL_I = "TraditionalI"
    TRADITIONAL_II = "TraditionalII"


ADJUSTED_LABEL = "Preparedness-adjusted"
MODEL_LABELS = {
    BaselineVariant.RAW: "Raw disparities",
    BaselineVariant.TRADITIONAL_I: "Traditional I",
    BaselineVariant.TRADITIONAL_II: "Traditional II",
}


class CovariateSets(BaseModel):
    """Covariates entering each traditional baseline (full and reduced sets)."""

    traditional_i: list[str] = Field(default_factory=list)
    traditional_ii: list[str] = Field(default_factory=list)


def with_mu(table: CohortTable, mu: np.ndarray) -> pd.DataFrame:
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (len(table),):
        raise DataError(f"Expected one preparedness score per unit ({len(table)}), got {mu.shape}")
    if np.isnan(mu).any():
        raise DataError("Preparedness scores contain missing values", column=MU)
    frame = table.frame.copy()
    frame[MU] = mu
    return frame


def fit_adjusted(
    table: CohortTable,
    mu: np.ndarray,
    *,
    exclude_strata: Sequence[str] = (),
    ridge: float = 0.0,
) -> AdjustedFit:
    """decision ~ group + logit(mu) + stratum fixed effects, over all units."""
    spec = DesignSpec(outcome=DECISION, prep=MU, ridge=ridge, exclude_strata=list(exclude_strata))
    return fit_logistic(with_mu(table, mu), spec, table.levels)


def fit_baseline(
    table: CohortTable,
    variant: BaselineVariant | str,
    covariate_sets: CovariateSets,
    *,
    ridge: float = 0.0,
) -> AdjustedFit:
    """Raw: decision ~ group + stratum. Traditional I/II add the full or reduced covariate set."""
    variant = BaselineVariant(variant)
    if variant is BaselineVariant.RAW:
        covariates: list[str] = []
    else:
        covariates = (
            covariate_sets.traditional_i if variant is BaselineVariant.TRADITIONAL_I
            else covariate_sets.traditional_ii
        )
        if not covariates:
            raise ConfigError(f"Covariate set for {variant.value} is empty")
        unknown = [c for c in covariates if c not in table.covariates]
        if unknown:
            raise ConfigError(f"{variant.value} names unknown covariate(s): {', '.join(unknown)}")
    spec = DesignSpec(outcome=DECISION, covariates=covariates, ridge=ridge)
    return fit_logistic(table.frame, spec, table.levels)


def _stars(coef: float, se: float) -> str:
    if not se > 0:
        return ""
    p = 2.0 * norm.sf(abs(coef) / se)
    return "***" if p < 0.001 else "**" if p < 0.01 else "*" if p < 0.05 else ""


def fit_table(fits: Mapping[str, AdjustedFit], digits: int = 2) -> pd.DataFrame:
    """Term rows x model columns with "OR (SE)" cells; SEs on the log-odds scale.

    Stratum fixed effects are summarized in one row rather than listed.
    """
    order: list[str] = []
    for fit in fits.values():
        for name in fit.coefficients:
            if name.startswith(f"{STRATUM}[") or name in order:
                continue
            order.append(name)

    def rank(name: str) -> tuple[int, int]:
        if name == INTERCEPT:
            return 0, 0
        if name.startswith(f"{GROUP}["):
            return 1, order.index(name)
        if name == PREP_TERM:
            return 3, 0
        return 2, order.index(name)

    rows = []
    for name in sorted(order, key=rank):
        row: dict[str, str] = {"term": name}
        for label, fit in fits.items():
            if name in fit.coefficients:
                coef, se = fit.coefficients[name], fit.se[name]
                row[label] = f"{np.exp(coef):.{digits}f}{_stars(coef, se)} ({se:.{digits}f})"
            else:
                row[label] = ""
        rows.append(row)
    rows.append({"term": "Stratum fixed effects", **{
        label: "Yes" if any(n.startswith(f"{STRATUM}[") for n in fit.coefficients) else "No"
        for label, fit in fits.items()
    }})
    rows.append({"term": "Observations", **{label: str(fit.n_obs) for label, fit in fits.items()}})
    return pd.DataFrame(rows, columns=["term", *fits.keys()])
