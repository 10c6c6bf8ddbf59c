"""Simulate pipeline: write a synthetic cohort, its truth record and a matching schema."""

from __future__ import annotations

import sys

from prepadj.core.config import RunConfig
from prepadj.core.constants import COHORT_FILE, SCHEMA_FILE, TRUTH_FILE
from prepadj.core.exceptions import ConfigError
from prepadj.dataset.io import schema_for, write_csv
from prepadj.pipeline.common import load_cohort, provenance, stage
from prepadj.reports.artifacts import ensure_writable, write_json


def run_simulate(config: RunConfig, *, force: bool = False) -> dict:
    if config.synthetic is None:
        raise ConfigError("simulate needs a [synthetic] section in the config")
    out = config.out
    targets = [out / COHORT_FILE, out / TRUTH_FILE, out / SCHEMA_FILE]
    ensure_writable(targets, force)

    with stage("generate"):
        cohort = load_cohort(config)
    prov = provenance(config, cohort)

    with stage("write"):
        write_csv(cohort.table, targets[0])
        write_json({"truth": cohort.truth.model_dump()}, targets[1], prov)
        write_json({"columns": schema_for(cohort.table).model_dump()}, targets[2], prov)
    print(f"  Wrote {len(cohort.table)} unit(s) to {targets[0]}", file=sys.stderr)

    return {
        "status": "ok",
        "units": len(cohort.table),
        "cohort": str(targets[0]),
        "truth": str(targets[1]),
        "schema": str(targets[2]),
        "config_hash": prov.config_hash,
    }
