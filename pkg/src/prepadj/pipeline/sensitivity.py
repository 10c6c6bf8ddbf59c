"""Sensitivity pipeline: propensity model, optional theta calibration, grid search."""

from __future__ import annotations

import sys

import numpy as np
import pandas as pd

from prepadj.core.config import RunConfig
from prepadj.core.constants import (
    BAND_FILE,
    BOOTSTRAP_FILE,
    FITS_FILE,
    GRID_FILE,
    MU,
    MU_FILE,
    PROPENSITY_CALIBRATION_FILE,
    UNIT_ID,
)
from prepadj.core.exceptions import MissingArtifactError
from prepadj.dataset.table import impute_means
from prepadj.glm.regressions import ADJUSTED_LABEL
from prepadj.pipeline.common import load_cohort, provenance, stage
from prepadj.reports.artifacts import Provenance, ensure_writable, read_json, read_table, write_json, write_table
from prepadj.sensitivity.calibrate import calibrate_theta
from prepadj.sensitivity.grid import grid_search
from prepadj.sensitivity.propensity import fit_propensity

OUTPUTS = (GRID_FILE, BAND_FILE, PROPENSITY_CALIBRATION_FILE)


def _aligned_mu(mu_frame: pd.DataFrame, unit_ids: np.ndarray) -> np.ndarray:
    if len(mu_frame) != len(unit_ids) or not (mu_frame[UNIT_ID].astype(str).to_numpy() == unit_ids.astype(str)).all():
        raise MissingArtifactError(
            f"{MU_FILE} does not match the cohort; rerun estimate with the same config"
        )
    return mu_frame[MU].to_numpy(dtype=float)


def _check_upstream(upstream: dict, mu_frame: pd.DataFrame, current: Provenance) -> None:
    """Estimate outputs must come from this cohort and these estimate settings."""
    mismatched = [
        key for key in ("estimate_hash", "seed", "input_hash")
        if upstream.get(key) != getattr(current, key)
    ]
    if mismatched:
        raise MissingArtifactError(
            f"{BOOTSTRAP_FILE} was written by a run with a different {', '.join(mismatched)}; "
            "rerun estimate with this config and seed"
        )
    stamps = set(mu_frame["config_hash"].astype(str)) if "config_hash" in mu_frame else set()
    if stamps != {upstream.get("config_hash")}:
        raise MissingArtifactError(f"{MU_FILE} and {BOOTSTRAP_FILE} come from different estimate runs")


def run_sensitivity(config: RunConfig, *, force: bool = False, theta: float | None = None) -> dict:
    out = config.out
    ensure_writable([out / name for name in OUTPUTS], force)

    with stage("upstream artifacts"):
        mu_frame = read_table(out / MU_FILE)
        fits = read_json(out / FITS_FILE)["fits"]
        boot_doc = read_json(out / BOOTSTRAP_FILE)
        boot = boot_doc["bootstrap"]
        if ADJUSTED_LABEL not in fits:
            raise MissingArtifactError(f"{FITS_FILE} has no {ADJUSTED_LABEL!r} fit")
        adjusted = fits[ADJUSTED_LABEL]

    with stage("load"):
        cohort = load_cohort(config)
        table = impute_means(cohort.table)
    prov = provenance(config, cohort)

    with stage("upstream artifacts"):
        _check_upstream(boot_doc.get("provenance", {}), mu_frame, prov)
        mu = _aligned_mu(mu_frame, table.unit_ids)

    calibration = None
    with stage("theta"):
        if theta is None and config.calibration.benchmark:
            calibration = calibrate_theta(
                table, config.calibration.benchmark, config.calibration.companions,
                slack=config.calibration.slack,
            )
            theta = calibration.theta
            print(f"  Calibrated theta = log({np.exp(theta):.0f}) from {calibration.benchmark}", file=sys.stderr)
        grid = config.sensitivity.build(theta)

    with stage("propensity model"):
        propensity = fit_propensity(
            table,
            config.propensity_grid or config.grid,
            config.seed,
            features=None,
            fraction=config.train_fraction,
            threads=config.threads,
        )
        print(f"  Propensity holdout AUC {propensity.holdout_auc:.3f}", file=sys.stderr)

    with stage("grid search"):
        result = grid_search(
            table,
            propensity.propensity,
            mu,
            grid,
            boot["se_boot"],
            point=boot["point"],
            exclude_strata=adjusted["dropped_strata"],
            ridge=config.ridge,
            threads=config.threads,
        )

    with stage("write"):
        write_table(result.to_frame(), out / GRID_FILE, prov)
        calib = pd.concat(
            [
                propensity.calibration_by_group.assign(panel="group"),
                propensity.calibration_by_stratum.assign(panel="stratum"),
            ],
            ignore_index=True,
        )
        write_table(calib, out / PROPENSITY_CALIBRATION_FILE, prov)
        band = {
            "theta_cap": result.theta_cap,
            "cells": len(result.cells),
            "band": result.band,
            "band_ci": result.band_ci,
            "zero_cell": result.zero_cell,
            "zero_cell_gap_se": result.zero_cell_gap_se,
            "point": boot["point"],
            "se_boot": boot["se_boot"],
            "dropped_strata": result.dropped_strata,
            "propensity_holdout_auc": propensity.holdout_auc,
            "theta_calibration": calibration.model_dump() if calibration else None,
        }
        write_json(band, out / BAND_FILE, prov)

    return {
        "status": "ok",
        "theta_cap": result.theta_cap,
        "cells": len(result.cells),
        "band": {g: list(v) for g, v in result.band.items()},
        "band_ci": {g: list(v) for g, v in result.band_ci.items()},
        "zero_cell_gap_se": result.zero_cell_gap_se,
        "config_hash": prov.config_hash,
        "out": str(out),
    }
