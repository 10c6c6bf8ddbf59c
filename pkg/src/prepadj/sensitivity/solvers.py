"""Closed-form nuisance solves for a binary unmeasured confounder.

For a unit with observed probability p, prevalence q and confounder effect
alpha, the baseline log-odds gamma satisfies

    (1 - q) * expit(gamma) + q * expit(gamma + alpha) = p.

With e = exp(gamma) and A = exp(alpha) this is the quadratic

    A(1 - p) e^2 + [(1 - q) + qA - p(1 + A)] e - p = 0,

whose leading and constant coefficients have opposite signs, so exactly one
root is positive. All functions broadcast over numpy arrays and return a
float when every argument is scalar.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, logit

from prepadj.core.constants import BISECTION_BRACKET, DISCRIMINANT_EPS
from prepadj.core.exceptions import SolverError

_BISECTION_STEPS = 100


def _out(value: np.ndarray, *args) -> np.ndarray | float:
    if all(np.ndim(a) == 0 for a in args):
        return float(value)
    return value


def mixture(gamma, q, alpha):
    """(1 - q) * expit(gamma) + q * expit(gamma + alpha)."""
    gamma, q, alpha = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (gamma, q, alpha)))
    value = (1.0 - q) * expit(gamma) + q * expit(gamma + alpha)
    return _out(value, gamma, q, alpha)


def _check_probability(p: np.ndarray, name: str) -> None:
    bad = np.flatnonzero(~((p > 0.0) & (p < 1.0)))
    if bad.size:
        i = int(bad[0])
        raise SolverError(f"{name} must lie strictly in (0, 1); unit {i} has {p.flat[i]!r}", index=i)


def _check_weight(q: np.ndarray, name: str) -> None:
    bad = np.flatnonzero(~((q >= 0.0) & (q <= 1.0)))
    if bad.size:
        i = int(bad[0])
        raise SolverError(f"{name} must lie in [0, 1]; unit {i} has {q.flat[i]!r}", index=i)


def _bisect(p: np.ndarray, q: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    lo = np.full(p.shape, -BISECTION_BRACKET)
    hi = np.full(p.shape, BISECTION_BRACKET)
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        above = (1.0 - q) * expit(mid) + q * expit(mid + alpha) > p
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


def _solve(p: np.ndarray, q: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    shape = p.shape
    p, q, alpha = p.ravel(), q.ravel(), alpha.ravel()
    A = np.exp(alpha)
    a2 = A * (1.0 - p)
    b = (1.0 - q) + q * A - p * (1.0 + A)
    disc = b * b + 4.0 * a2 * p
    root = np.sqrt(np.clip(disc, 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        # pick the form that avoids cancellation
        e = np.where(b > 0.0, 2.0 * p / (b + root), (root - b) / (2.0 * a2))
        gamma = np.log(np.asarray(e, dtype=float))

    fallback = (disc < DISCRIMINANT_EPS) | ~np.isfinite(gamma)
    if fallback.any():
        gamma = gamma.copy()
        gamma[fallback] = _bisect(p[fallback], q[fallback], alpha[fallback])

    base = logit(p)
    gamma = np.where(q == 1.0, base - alpha, gamma)
    gamma = np.where((q == 0.0) | (alpha == 0.0), base, gamma)
    return gamma.reshape(shape)


def solve_gamma(p, q, alpha):
    """Baseline decision log-odds gamma reproducing the propensity p under prevalence q."""
    p, q, alpha = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (p, q, alpha)))
    _check_probability(p, "propensity")
    _check_weight(q, "prevalence")
    return _out(_solve(p, q, alpha), p, q, alpha)


def posterior_u(gamma, alpha, q):
    """Pr(u = 1 | decision = 1) by Bayes' rule."""
    gamma, alpha, q = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (gamma, alpha, q)))
    with_u = q * expit(gamma + alpha)
    w = with_u / ((1.0 - q) * expit(gamma) + with_u)
    w = np.where(alpha == 0.0, q, w)
    w = np.where(q == 0.0, 0.0, np.where(q == 1.0, 1.0, w))
    return _out(w, gamma, alpha, q)


def solve_beta(mu, w, delta):
    """Baseline outcome log-odds beta with (1 - w) expit(beta) + w expit(beta + delta) = mu."""
    mu, w, delta = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (mu, w, delta)))
    _check_probability(mu, "preparedness")
    _check_weight(w, "posterior weight")
    return _out(_solve(mu, w, delta), mu, w, delta)
