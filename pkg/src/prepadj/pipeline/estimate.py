"""Estimate pipeline: preparedness model, adjusted and baseline regressions, bootstrap."""

from __future__ import annotations

import sys
from pathlib import Path

import pandas as pd

from prepadj.core.config import RunConfig
from prepadj.core.constants import (
    BOOTSTRAP_FILE,
    CALIBRATION_GROUP_FILE,
    CALIBRATION_STRATUM_FILE,
    FIT_TABLE_FILE,
    FITS_FILE,
    GROUP,
    INFORMATION_FILE,
    MODEL_FILE,
    MU,
    MU_FILE,
    STRATUM,
    UNIT_ID,
)
from prepadj.core.exceptions import ConfigError
from prepadj.dataset.table import classify_information, complete_units, impute_means, information_table, split_holdout
from prepadj.glm.bootstrap import PreparednessPipeline, bootstrap_ci
from prepadj.glm.design import group_term
from prepadj.glm.irls import AdjustedFit
from prepadj.glm.regressions import (
    ADJUSTED_LABEL,
    MODEL_LABELS,
    BaselineVariant,
    fit_adjusted,
    fit_baseline,
    fit_table,
)
from prepadj.pipeline.common import load_cohort, provenance, stage
from prepadj.prepmodel.boosting import evaluate_holdout, load_model, predict_mu, save_model
from prepadj.prepmodel.selection import fit_selected
from prepadj.reports.artifacts import ensure_writable, write_json, write_table

OUTPUTS = (
    MODEL_FILE, MU_FILE, FITS_FILE, FIT_TABLE_FILE, BOOTSTRAP_FILE,
    INFORMATION_FILE, CALIBRATION_GROUP_FILE, CALIBRATION_STRATUM_FILE,
)


def _with_bootstrap_se(fit: AdjustedFit, se_boot: dict[str, float]) -> AdjustedFit:
    se = dict(fit.se)
    for group, value in se_boot.items():
        se[group_term(group)] = value
    return fit.model_copy(update={"se": se})


def run_estimate(
    config: RunConfig,
    *,
    force: bool = False,
    model_in: Path | None = None,
    model_out: Path | None = None,
) -> dict:
    out = config.out
    ensure_writable([out / name for name in OUTPUTS], force)

    with stage("load"):
        cohort = load_cohort(config)
    prov = provenance(config, cohort)

    with stage("impute"):
        table = impute_means(cohort.table)
        complete = complete_units(table)
        print(f"  {len(complete)} of {len(table)} unit(s) have complete information", file=sys.stderr)
        train, holdout = split_holdout(complete, config.train_fraction, config.seed)

    with stage("preparedness model"):
        if model_in is not None:
            print(f"  Loading preparedness model from {model_in}...", file=sys.stderr)
            model = load_model(model_in)
            if model.report is None:
                raise ConfigError(f"Model {model_in} carries no training report; cannot bootstrap it")
        else:
            print(f"  Training preparedness model on {len(train)} unit(s)...", file=sys.stderr)
            model = fit_selected(train, config.grid, config.seed, features=config.features, threads=config.threads)
        held = evaluate_holdout(model, holdout)
        model.report.holdout_auc = held.auc
        print(f"  Holdout AUC {held.auc:.3f}", file=sys.stderr)
        mu = predict_mu(model, table)

    with stage("adjusted regression"):
        adjusted = fit_adjusted(table, mu, ridge=config.ridge)

    fits: dict[str, AdjustedFit] = {ADJUSTED_LABEL: adjusted}
    with stage("baseline regressions"):
        for variant in BaselineVariant:
            sets = config.covariate_sets
            if variant is BaselineVariant.TRADITIONAL_I and not sets.traditional_i:
                print(f"  Skipping {variant.value}: no covariate set configured", file=sys.stderr)
                continue
            if variant is BaselineVariant.TRADITIONAL_II and not sets.traditional_ii:
                print(f"  Skipping {variant.value}: no covariate set configured", file=sys.stderr)
                continue
            fits[MODEL_LABELS[variant]] = fit_baseline(table, variant, sets, ridge=config.ridge)

    with stage("bootstrap"):
        pipeline = PreparednessPipeline(
            params=model.report.params,
            rounds=model.report.rounds_used,
            features=config.features,
            ridge=config.ridge,
        )
        boot = bootstrap_ci(
            table,
            pipeline,
            config.bootstrap.replicates,
            config.bootstrap_seed,
            point=adjusted.group_coefficients(),
            threads=config.threads,
        )

    with stage("write"):
        save_model(model, model_out or out / MODEL_FILE)
        if model_out is not None:
            save_model(model, out / MODEL_FILE)
        write_table(
            pd.DataFrame({
                UNIT_ID: table.unit_ids,
                GROUP: table.group,
                STRATUM: table.stratum,
                "status": [s.value for s in classify_information(table)],
                MU: mu,
            }),
            out / MU_FILE,
            prov,
        )
        write_table(information_table(table), out / INFORMATION_FILE, prov)
        write_json({"fits": {label: fit.model_dump() for label, fit in fits.items()}}, out / FITS_FILE, prov)
        table_fits = {**fits, ADJUSTED_LABEL: _with_bootstrap_se(adjusted, boot.se_boot)}
        write_table(fit_table(table_fits), out / FIT_TABLE_FILE, prov)
        write_json({"bootstrap": boot.model_dump()}, out / BOOTSTRAP_FILE, prov)
        write_table(pd.DataFrame(held.calibration_by_group), out / CALIBRATION_GROUP_FILE, prov)
        write_table(pd.DataFrame(held.calibration_by_stratum), out / CALIBRATION_STRATUM_FILE, prov)

    return {
        "status": "ok",
        "units": len(table),
        "complete_units": len(complete),
        "holdout_auc": held.auc,
        "chosen_params": model.report.params.model_dump(),
        "rounds": model.report.rounds_used,
        "odds_ratios": {g: float(adjusted.odds_ratios[group_term(g)]) for g in adjusted.group_coefficients()},
        "ci95": {g: list(ci) for g, ci in boot.ci95.items()},
        "config_hash": prov.config_hash,
        "out": str(out),
    }
