"""Tests for the confounder-effect cap calibration."""

from __future__ import annotations

import math

import numpy as np
import pandas as pd
import pytest

from prepadj.core.exceptions import ConfigError, DataError
from prepadj.dataset.table import build_table
from prepadj.sensitivity.calibrate import calibrate_theta, round_theta


def _cohort(n_low: int, n_high: int, decided: tuple[int, int], passed: tuple[int, int]):
    """Single-stratum cohort; `decided`/`passed` are (low, high) counts. Deciders are all assessed."""
    rows = []
    for high, n, n_dec, n_pass in ((0, n_low, decided[0], passed[0]), (1, n_high, decided[1], passed[1])):
        for i in range(n):
            dec = int(i < n_dec)
            rows.append({
                "group": "White" if i % 2 else "Black",
                "stratum": "S1",
                "decision": dec,
                "assessed": dec,
                "passed": float(i < n_pass) if dec else np.nan,
                "cohort": "c1",
                "score": 10.0 if high else 0.0,
                "shade": "x" if i % 3 else "y",
            })
    return build_table(pd.DataFrame(rows), ["score"], ["shade"])


# ---------------------------------------------------------------------------
# round_theta
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    ("odds_ratio", "expected"),
    [(2.95, 3), (3.05, 3), (3.2, 4), (1.2, 2), (1.0, 2)],
)
def test_round_theta(odds_ratio: float, expected: int) -> None:
    assert round_theta(odds_ratio) == pytest.approx(math.log(expected))


# ---------------------------------------------------------------------------
# calibrate_theta
# ---------------------------------------------------------------------------

def test_calibration_reads_odds_ratio_three() -> None:
    table = _cohort(90, 10, decided=(30, 6), passed=(12, 4))
    result = calibrate_theta(table, "score")
    assert 0.0 < result.threshold < 10.0
    assert result.coef_decision == pytest.approx(math.log(3), abs=1e-6)
    assert result.coef_passage == pytest.approx(math.log(3), abs=1e-6)
    assert result.odds_ratio_max == pytest.approx(3.0, rel=1e-6)
    assert result.theta == pytest.approx(math.log(3))


def test_calibration_floor_without_association() -> None:
    table = _cohort(80, 20, decided=(40, 10), passed=(20, 5))
    result = calibrate_theta(table, "score")
    assert abs(result.coef_decision) < 1e-6
    assert result.theta == pytest.approx(math.log(2))


def test_calibration_with_companion() -> None:
    table = _cohort(90, 10, decided=(30, 6), passed=(12, 4))
    result = calibrate_theta(table, "score", companions=["shade"])
    assert result.theta >= math.log(2)


def test_benchmark_must_be_numeric() -> None:
    table = _cohort(90, 10, decided=(30, 6), passed=(12, 4))
    with pytest.raises(ConfigError):
        calibrate_theta(table, "shade")


def test_constant_benchmark_rejected() -> None:
    table = _cohort(90, 0, decided=(30, 0), passed=(12, 0))
    with pytest.raises(DataError, match="constant"):
        calibrate_theta(table, "score")


def test_missing_benchmark_rejected() -> None:
    table = _cohort(90, 10, decided=(30, 6), passed=(12, 4))
    frame = table.frame.copy()
    frame.loc[3, "score"] = np.nan
    with pytest.raises(DataError, match="impute"):
        calibrate_theta(build_table(frame, ["score"], ["shade"]), "score")
