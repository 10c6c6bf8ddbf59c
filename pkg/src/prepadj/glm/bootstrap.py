"""Nonparametric bootstrap of the group coefficients.

Replicate i, attempt k draws its resample and its pipeline seed from
SeedSequence([master_seed, i, k]), so results do not depend on which
thread ran which replicate or in what order.
"""

from __future__ import annotations

import sys
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel

from prepadj.core.constants import DECISION, MAX_REDRAWS, PASSED, STRATUM, Z_95
from prepadj.core.exceptions import BootstrapError, ConfigError
from prepadj.dataset.table import CohortTable, complete_units
from prepadj.glm.regressions import fit_adjusted
from prepadj.prepmodel.boosting import BoostParams, fit_boosted, predict_mu

Pipeline = Callable[[CohortTable, int], dict[str, float]]


class BootstrapResult(BaseModel):
    point: dict[str, float]
    replicate_estimates: dict[str, list[float]]
    se_boot: dict[str, float]
    ci95: dict[str, tuple[float, float]]
    replicates: int
    master_seed: int
    redraws: int = 0


@dataclass(frozen=True)
class PreparednessPipeline:
    """Refit closure: boosted model on the replicate's Complete units, then the adjusted regression.

    Hyperparameters stay fixed at the values chosen on the original data.
    The table is expected to be imputed already.
    """

    params: BoostParams
    rounds: int
    target: str = PASSED
    features: list[str] | None = field(default=None)
    ridge: float = 0.0

    def __call__(self, table: CohortTable, seed: int) -> dict[str, float]:
        model = fit_boosted(
            complete_units(table), self.params, self.rounds, seed,
            target=self.target, features=self.features,
        )
        mu = predict_mu(model, table)
        return fit_adjusted(table, mu, ridge=self.ridge).group_coefficients()


def _vanished(table: CohortTable, sample: CohortTable) -> str | None:
    missing = sorted(set(table.groups) - set(np.unique(sample.group)))
    if missing:
        return f"group(s) {', '.join(missing)} absent"
    frame = sample.frame
    spread = frame.groupby(STRATUM, sort=False)[DECISION].agg(["min", "max"])
    if (spread["min"] == spread["max"]).all():
        return "no stratum has decision variation"
    return None


def _replicate(
    table: CohortTable,
    pipeline: Pipeline,
    master_seed: int,
    index: int,
) -> tuple[dict[str, float], int]:
    n = len(table)
    reasons = []
    for attempt in range(MAX_REDRAWS):
        seq = np.random.SeedSequence([master_seed, index, attempt])
        rng = np.random.default_rng(seq)
        sample = table.take(rng.integers(0, n, size=n))
        reason = _vanished(table, sample)
        if reason is None:
            fit_seed = int(seq.generate_state(1)[0])
            return pipeline(sample, fit_seed), attempt
        reasons.append(reason)
    raise BootstrapError(
        f"Replicate {index} could not be drawn after {MAX_REDRAWS} attempts: {'; '.join(reasons)}"
    )


def bootstrap_ci(
    table: CohortTable,
    pipeline: Pipeline,
    replicates: int,
    master_seed: int,
    *,
    point: dict[str, float] | None = None,
    threads: int = 1,
) -> BootstrapResult:
    """Standard errors as the sample SD over replicates; CIs as point +/- 1.96 SE."""
    if replicates < 2:
        raise ConfigError(f"Bootstrap needs at least 2 replicates, got {replicates}")
    if point is None:
        point = pipeline(table, master_seed)

    print(f"  Bootstrapping {replicates} replicate(s)...", file=sys.stderr)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        outcomes = list(pool.map(
            lambda i: _replicate(table, pipeline, master_seed, i), range(replicates),
        ))

    estimates = {g: [float(est.get(g, np.nan)) for est, _ in outcomes] for g in point}
    se = {}
    for g, values in estimates.items():
        arr = np.asarray(values)
        if np.isnan(arr).any():
            raise BootstrapError(f"Coefficient for {g!r} missing in {int(np.isnan(arr).sum())} replicate(s)")
        se[g] = float(np.std(arr, ddof=1))
    return BootstrapResult(
        point=dict(point),
        replicate_estimates=estimates,
        se_boot=se,
        ci95={g: (point[g] - Z_95 * se[g], point[g] + Z_95 * se[g]) for g in point},
        replicates=replicates,
        master_seed=master_seed,
        redraws=sum(attempts for _, attempts in outcomes),
    )
