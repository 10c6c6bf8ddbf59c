"""Weighted logistic regression by iteratively reweighted least squares.

Binary and fractional outcomes are handled identically: the weighted
Bernoulli quasi-log-likelihood is maximized with dispersion fixed at 1.
"""

from __future__ import annotations

import warnings
from collections.abc import Mapping

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.special import expit, log_expit, xlogy

from prepadj.core.constants import (
    GROUP,
    IRLS_DEVIANCE_TOL,
    IRLS_GRADIENT_TOL,
    IRLS_MAX_ITER,
    IRLS_STEP_TOL,
    RIDGE_FALLBACK,
    SEPARATION_BOUND,
)
from prepadj.core.exceptions import ConvergenceError, SeparationError
from prepadj.glm.design import Design, DesignSpec, build_design


class AdjustedFit(BaseModel):
    coefficients: dict[str, float]
    se: dict[str, float]
    odds_ratios: dict[str, float]
    deviance: float
    iterations: int
    converged: bool
    gradient_norm: float
    n_obs: int
    ridge: float = 0.0
    ridge_fallback: bool = False
    dropped_strata: list[str] = Field(default_factory=list)
    dropped_columns: list[str] = Field(default_factory=list)
    reference_group: str | None = None

    def group_coefficients(self) -> dict[str, float]:
        """Log-odds coefficient per non-reference group, keyed by group label."""
        prefix = f"{GROUP}["
        return {
            name[len(prefix):-1]: value
            for name, value in self.coefficients.items()
            if name.startswith(prefix)
        }

    def group_se(self) -> dict[str, float]:
        prefix = f"{GROUP}["
        return {name[len(prefix):-1]: value for name, value in self.se.items() if name.startswith(prefix)}


def deviance(eta: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    ll = y * log_expit(eta) + (1.0 - y) * log_expit(-eta)
    saturated = xlogy(y, y) + xlogy(1.0 - y, 1.0 - y)
    return float(2.0 * np.sum(w * (saturated - ll)))


def _newton(design: Design, ridge: float) -> tuple[np.ndarray, np.ndarray, float, int, bool, float]:
    X, y, w = design.X, design.y, design.w
    p_dim = X.shape[1]
    beta = np.zeros(p_dim)
    eta = X @ beta
    objective = deviance(eta, y, w) + ridge * beta @ beta

    for it in range(1, IRLS_MAX_ITER + 1):
        mu = expit(eta)
        grad = X.T @ (w * (y - mu)) - ridge * beta
        hess = (X * (w * mu * (1.0 - mu))[:, None]).T @ X + ridge * np.eye(p_dim)
        try:
            step = cho_solve(cho_factor(hess), grad)
        except LinAlgError:
            # information matrix lost definiteness: coefficients ran off
            return beta, hess, objective, it, False, float(np.max(np.abs(grad)))

        scale = 1.0
        for _ in range(30):
            candidate = beta + scale * step
            eta_c = X @ candidate
            obj_c = deviance(eta_c, y, w) + ridge * candidate @ candidate
            if obj_c <= objective + 1e-12 * abs(objective):
                break
            scale *= 0.5
        change = objective - obj_c
        moved = scale * float(np.max(np.abs(step), initial=0.0))
        beta, eta, objective = candidate, eta_c, obj_c

        if np.max(np.abs(beta)) > SEPARATION_BOUND:
            return beta, hess, objective, it, False, float(np.max(np.abs(grad)))

        mu = expit(eta)
        grad = X.T @ (w * (y - mu)) - ridge * beta
        grad_norm = float(np.max(np.abs(grad))) if grad.size else 0.0
        # a separated fit keeps taking unit-sized steps however flat the deviance gets
        if (grad_norm < IRLS_GRADIENT_TOL or abs(change) < IRLS_DEVIANCE_TOL) and moved < IRLS_STEP_TOL:
            hess = (X * (w * mu * (1.0 - mu))[:, None]).T @ X + ridge * np.eye(p_dim)
            return beta, hess, objective, it, True, grad_norm

    raise ConvergenceError(f"IRLS did not converge in {IRLS_MAX_ITER} iterations")


def _solve(design: Design, ridge: float) -> AdjustedFit:
    beta, hess, _, iterations, converged, grad_norm = _newton(design, ridge)
    if not converged or np.max(np.abs(beta), initial=0.0) > SEPARATION_BOUND:
        raise SeparationError(
            f"Coefficients diverge beyond {SEPARATION_BOUND:g} in magnitude "
            f"(ridge={ridge:g}); the outcome is (quasi-)perfectly separated. "
            "Drop the offending terms or set a larger ridge penalty"
        )
    try:
        cov = cho_solve(cho_factor(hess), np.eye(hess.shape[0]))
    except LinAlgError as e:
        raise SeparationError(f"Information matrix is singular at the solution: {e}") from e
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    names = design.names
    return AdjustedFit(
        coefficients=dict(zip(names, beta.tolist())),
        se=dict(zip(names, se.tolist())),
        odds_ratios=dict(zip(names, np.exp(beta).tolist())),
        deviance=deviance(design.X @ beta, design.y, design.w),
        iterations=iterations,
        converged=converged,
        gradient_norm=grad_norm,
        n_obs=int(design.y.shape[0]),
        ridge=ridge,
        dropped_strata=design.dropped_strata,
        dropped_columns=design.dropped_columns,
    )


def fit_design(design: Design, ridge: float = 0.0) -> AdjustedFit:
    """Fit a prepared design; on separation with no ridge, retry once with a tiny ridge."""
    try:
        return _solve(design, ridge)
    except SeparationError:
        if ridge > 0:
            raise
    warnings.warn(
        f"Separation detected; refitting with ridge {RIDGE_FALLBACK:g}",
        RuntimeWarning,
        stacklevel=3,
    )
    fit = _solve(design, RIDGE_FALLBACK)
    return fit.model_copy(update={"ridge_fallback": True})


def fit_logistic(
    frame: pd.DataFrame,
    spec: DesignSpec,
    levels: Mapping[str, tuple[str, ...]],
) -> AdjustedFit:
    """Build the design for `spec` on `frame` and fit it by IRLS."""
    design = build_design(frame, spec, levels)
    fit = fit_design(design, spec.ridge)
    if spec.group:
        fit = fit.model_copy(update={"reference_group": levels[GROUP][0]})
    return fit
