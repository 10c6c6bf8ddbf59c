"""Grid search over confounder scenarios and the resulting sensitivity band."""

from __future__ import annotations

import itertools
import math
import sys
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, field_validator, model_validator

from prepadj.core.constants import DEFAULT_Q_STEP, DEFAULT_THETA, THETA_CAP_TOL, Z_95
from prepadj.core.exceptions import PrepAdjError, SensitivityError
from prepadj.dataset.table import CohortTable
from prepadj.sensitivity.augment import SensitivityParams, augment, reestimate


def log_integer_values(theta_cap: float) -> list[float]:
    """0 and +/- log k for k = 2, 3, ... while log k <= theta_cap."""
    values = [0.0]
    k = 2
    while math.log(k) <= theta_cap + 1e-12:
        values += [-math.log(k), math.log(k)]
        k += 1
    return sorted(values)


def q_values(step: float = DEFAULT_Q_STEP) -> list[float]:
    n = int(round(1.0 / step))
    return [round(i / n, 10) for i in range(n + 1)]


class SensitivityGrid(BaseModel):
    alpha: list[float]
    delta: list[float]
    q_ref: list[float]
    q_alt: list[float]
    theta_cap: float = DEFAULT_THETA

    @field_validator("alpha", "delta", "q_ref", "q_alt")
    @classmethod
    def _nonempty(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("grid axes must be nonempty")
        return v

    @model_validator(mode="after")
    def _check(self) -> SensitivityGrid:
        if 0.0 not in self.alpha or 0.0 not in self.delta:
            raise ValueError("alpha and delta must both include 0 so the zero-confounding cell is searched")
        for q in self.q_ref + self.q_alt:
            if not 0.0 <= q <= 1.0:
                raise ValueError(f"prevalence {q} outside [0, 1]")
        for name in ("alpha", "delta"):
            over = [v for v in getattr(self, name) if abs(v) > self.theta_cap + THETA_CAP_TOL]
            if over:
                raise ValueError(f"{name} value {over[0]:.4f} exceeds theta_cap {self.theta_cap:.4f}")
        return self

    def cells(self) -> list[SensitivityParams]:
        return [
            SensitivityParams(q_ref=qr, q_alt=qa, alpha=a, delta=d, theta_cap=self.theta_cap)
            for a, d, qr, qa in itertools.product(self.alpha, self.delta, self.q_ref, self.q_alt)
        ]


def default_grid(theta_cap: float = DEFAULT_THETA, q_step: float = DEFAULT_Q_STEP) -> SensitivityGrid:
    effects = log_integer_values(theta_cap)
    qs = q_values(q_step)
    return SensitivityGrid(alpha=effects, delta=effects, q_ref=qs, q_alt=qs, theta_cap=theta_cap)


class GridCell(BaseModel):
    params: SensitivityParams
    coefficients: dict[str, float]


class SensitivityResult(BaseModel):
    cells: list[GridCell]
    band: dict[str, tuple[float, float]]
    band_ci: dict[str, tuple[float, float]]
    zero_cell: dict[str, float]
    zero_cell_gap_se: dict[str, float | None] | None = None
    theta_cap: float
    dropped_strata: list[str] = Field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        """Long format: one row per cell per group."""
        rows = [
            {
                "alpha": cell.params.alpha,
                "delta": cell.params.delta,
                "q_ref": cell.params.q_ref,
                "q_alt": cell.params.q_alt,
                "group": group,
                "coefficient": coef,
                "odds_ratio": math.exp(coef),
            }
            for cell in self.cells
            for group, coef in cell.coefficients.items()
        ]
        return pd.DataFrame(rows, columns=["alpha", "delta", "q_ref", "q_alt", "group", "coefficient", "odds_ratio"])


def _evaluate(
    table: CohortTable,
    propensity: np.ndarray,
    mu: np.ndarray,
    params: SensitivityParams,
    exclude_strata: Sequence[str],
    ridge: float,
) -> dict[str, float]:
    try:
        fit = reestimate(augment(table, propensity, mu, params), exclude_strata=exclude_strata, ridge=ridge)
    except PrepAdjError as e:
        raise SensitivityError(f"Grid cell {params.model_dump()} failed: {e}", params=params.model_dump()) from e
    return fit.group_coefficients()


def grid_search(
    table: CohortTable,
    propensity: np.ndarray,
    mu: np.ndarray,
    grid: SensitivityGrid,
    se_boot: dict[str, float],
    *,
    point: dict[str, float] | None = None,
    exclude_strata: Sequence[str] = (),
    ridge: float = 0.0,
    threads: int = 1,
) -> SensitivityResult:
    """Re-estimate the group coefficients in every cell; band = min/max, band CI = band +/- 1.96 SE."""
    cells = grid.cells()
    print(f"  Searching {len(cells)} sensitivity cell(s)...", file=sys.stderr)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(
            lambda params: _evaluate(table, propensity, mu, params, exclude_strata, ridge), cells,
        ))

    groups = list(results[0])
    unknown = [g for g in groups if g not in se_boot]
    if unknown:
        raise SensitivityError(f"No bootstrap SE for group(s) {', '.join(unknown)}; the band CI needs one per group")
    band, band_ci = {}, {}
    for g in groups:
        values = [r[g] for r in results]
        lo, hi = min(values), max(values)
        se = se_boot[g]
        band[g] = (lo, hi)
        band_ci[g] = (lo - Z_95 * se, hi + Z_95 * se)

    zero = next(r for c, r in zip(cells, results) if c.is_zero)
    gap = None
    if point is not None:
        gap = {
            g: (zero[g] - point[g]) / se_boot[g] if se_boot[g] > 0 else None
            for g in groups if g in point
        }
    return SensitivityResult(
        cells=[GridCell(params=c, coefficients=r) for c, r in zip(cells, results)],
        band=band,
        band_ci=band_ci,
        zero_cell=zero,
        zero_cell_gap_se=gap,
        theta_cap=grid.theta_cap,
        dropped_strata=list(exclude_strata),
    )
