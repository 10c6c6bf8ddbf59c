"""Design matrices for the disparity regressions.

Columns are laid out in a fixed order: intercept, group dummies (reference
level omitted), the preparedness logit, covariates (categoricals as
treatment-coded dummies against their first level), then stratum fixed
effects against the first retained stratum.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator
from scipy.linalg import qr
from scipy.special import logit

from prepadj.core.constants import DECISION, GROUP, PROB_CLIP, RANK_TOL, STRATUM
from prepadj.core.exceptions import ConfigError, DataError

INTERCEPT = "(Intercept)"
PREP_TERM = "prep_logit"


def group_term(level: str) -> str:
    return f"{GROUP}[{level}]"


def stratum_term(level: str) -> str:
    return f"{STRATUM}[{level}]"


class DesignSpec(BaseModel):
    """Which terms enter a logistic regression and how rows are weighted."""

    outcome: str = DECISION
    group: bool = True
    stratum: bool = True
    covariates: list[str] = Field(default_factory=list)
    prep: str | None = None
    weights: str | None = None
    ridge: float = 0.0
    exclude_strata: list[str] = Field(default_factory=list)

    @field_validator("ridge")
    @classmethod
    def _ridge(cls, v: float) -> float:
        if v < 0:
            raise ValueError("ridge must be nonnegative")
        return v


@dataclass(frozen=True)
class Design:
    X: np.ndarray
    y: np.ndarray
    w: np.ndarray
    names: list[str]
    dropped_strata: list[str]
    dropped_columns: list[str]


def _constant_outcome_strata(stratum: np.ndarray, y: np.ndarray, w: np.ndarray) -> set[str]:
    frame = pd.DataFrame({"s": stratum, "y": y})[w > 0]
    stats = frame.groupby("s", sort=True)["y"].agg(["min", "max"])
    flat = (stats["max"] <= 0.0) | (stats["min"] >= 1.0)
    return set(stats.index[flat.to_numpy()])


def _dummies(values: np.ndarray, levels: tuple[str, ...], name: str) -> tuple[np.ndarray, list[str]]:
    cols = [(values == lvl).astype(float) for lvl in levels[1:]]
    names = [f"{name}[{lvl}]" for lvl in levels[1:]]
    if not cols:
        return np.empty((values.shape[0], 0)), []
    return np.column_stack(cols), names


def _independent_columns(X: np.ndarray) -> np.ndarray:
    """Boolean mask of columns kept after a rank-revealing pivoted QR."""
    if X.shape[1] == 0:
        return np.ones(0, dtype=bool)
    _, R, piv = qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int((diag > RANK_TOL * diag[0]).sum()) if diag.size and diag[0] > 0 else 0
    keep = np.zeros(X.shape[1], dtype=bool)
    keep[piv[:rank]] = True
    return keep


def build_design(frame: pd.DataFrame, spec: DesignSpec, levels: Mapping[str, tuple[str, ...]]) -> Design:
    """Assemble X, y and weights for `spec`, dropping separable strata and collinear columns."""
    if spec.outcome not in frame:
        raise ConfigError(f"Outcome column {spec.outcome!r} not found")
    y = frame[spec.outcome].to_numpy(dtype=float)
    if np.isnan(y).any() or (y < 0).any() or (y > 1).any():
        raise DataError(f"Outcome {spec.outcome!r} must lie in [0, 1] for every row", column=spec.outcome)

    if spec.weights is not None:
        w = frame[spec.weights].to_numpy(dtype=float)
        if not np.isfinite(w).all() or (w < 0).any():
            raise DataError("Weights must be finite and nonnegative", column=spec.weights)
    else:
        w = np.ones(y.shape[0])

    dropped_strata: list[str] = []
    keep_rows = np.ones(y.shape[0], dtype=bool)
    strata: tuple[str, ...] = ()
    if spec.stratum:
        strata = tuple(levels[STRATUM])
        stratum = frame[STRATUM].to_numpy()
        drop = _constant_outcome_strata(stratum, y, w) | set(spec.exclude_strata)
        dropped_strata = [s for s in strata if s in drop]
        keep_rows = ~np.isin(stratum, dropped_strata)
        present = set(stratum[keep_rows])
        strata = tuple(s for s in strata if s in present)

    sub = frame[keep_rows]
    n = int(keep_rows.sum())
    if n == 0:
        raise DataError("No rows left after dropping strata without outcome variation")

    blocks: list[np.ndarray] = [np.ones((n, 1))]
    names = [INTERCEPT]
    if spec.group:
        X_g, n_g = _dummies(sub[GROUP].to_numpy(), tuple(levels[GROUP]), GROUP)
        blocks.append(X_g)
        names += n_g
    if spec.prep is not None:
        mu = np.clip(sub[spec.prep].to_numpy(dtype=float), PROB_CLIP, 1.0 - PROB_CLIP)
        blocks.append(logit(mu)[:, None])
        names.append(PREP_TERM)
    for col in spec.covariates:
        if col not in sub:
            raise ConfigError(f"Covariate {col!r} not found")
        if col in levels:
            X_c, n_c = _dummies(sub[col].to_numpy(), tuple(levels[col]), col)
            blocks.append(X_c)
            names += n_c
        else:
            x = sub[col].to_numpy(dtype=float)
            if np.isnan(x).any():
                raise DataError(f"Covariate {col!r} has missing values; impute first", column=col)
            blocks.append(x[:, None])
            names.append(col)
    if spec.stratum:
        X_s, n_s = _dummies(sub[STRATUM].to_numpy(), strata, STRATUM)
        blocks.append(X_s)
        names += n_s

    X = np.hstack(blocks)
    keep = _independent_columns(X)
    dropped_columns = [name for name, k in zip(names, keep) if not k]
    return Design(
        X=X[:, keep],
        y=y[keep_rows],
        w=w[keep_rows],
        names=[name for name, k in zip(names, keep) if k],
        dropped_strata=dropped_strata,
        dropped_columns=dropped_columns,
    )
