"""Discrimination and calibration diagnostics."""

from __future__ import annotations

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from prepadj.core.constants import LOW_COUNT_THRESHOLD
from prepadj.core.exceptions import DegenerateTargetError


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Probability a random positive outscores a random negative; ties count 0.5."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must have the same length")
    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateTargetError("AUC is undefined for single-class labels")
    ranks = rankdata(scores)  # average ranks credit ties 0.5
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def calibration_report(
    mu: np.ndarray,
    labels: np.ndarray,
    cells: np.ndarray,
    min_count: int = LOW_COUNT_THRESHOLD,
) -> pd.DataFrame:
    """Mean prediction vs empirical rate per cell; cells under `min_count` are flagged."""
    frame = pd.DataFrame({
        "cell": np.asarray(cells).astype(str),
        "mu": np.asarray(mu, dtype=float),
        "label": np.asarray(labels, dtype=float),
    })
    report = (
        frame.groupby("cell", sort=True)
        .agg(mean_mu=("mu", "mean"), empirical_rate=("label", "mean"), count=("label", "size"))
        .reset_index()
    )
    report["gap"] = report["mean_mu"] - report["empirical_rate"]
    report["low_count"] = report["count"] < min_count
    return report
