"""Shared pieces of the command pipelines: cohort loading, provenance, stages."""

from __future__ import annotations

import sys
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import dataclass

from prepadj.core.config import RunConfig
from prepadj.core.exceptions import PrepAdjError
from prepadj.dataset.io import load_csv
from prepadj.dataset.synthetic import SyntheticTruth, generate_synthetic
from prepadj.dataset.table import CohortTable
from prepadj.reports.artifacts import Provenance
from prepadj.utils.hashing import config_hash, estimate_hash, file_hash


@dataclass(frozen=True, eq=False)
class Cohort:
    table: CohortTable
    truth: SyntheticTruth | None
    input_hash: str | None


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Tag any PrepAdjError raised inside with the pipeline stage name."""
    try:
        yield
    except PrepAdjError as e:
        if e.stage is None:
            e.stage = name
        raise


def load_cohort(config: RunConfig) -> Cohort:
    """Read the configured CSV, or regenerate the synthetic cohort from the run seed."""
    if config.input is not None:
        print(f"  Loading {config.input}...", file=sys.stderr)
        table = load_csv(config.input, config.columns)
        return Cohort(table=table, truth=None, input_hash=file_hash(config.input))
    spec = config.synthetic
    truth = spec.truth.model_copy(update={"seed": config.seed})
    print(f"  Generating synthetic cohort of {spec.n_units} unit(s)...", file=sys.stderr)
    table, completed = generate_synthetic(truth, spec.n_units, spec.n_strata, spec.n_covariates)
    return Cohort(table=table, truth=completed, input_hash=None)


def provenance(config: RunConfig, cohort: Cohort | None = None) -> Provenance:
    return Provenance(
        config_hash=config_hash(config),
        estimate_hash=estimate_hash(config),
        seed=config.seed,
        input_hash=cohort.input_hash if cohort else None,
    )
