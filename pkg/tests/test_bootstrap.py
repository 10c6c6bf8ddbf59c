"""Tests for the bootstrap of group coefficients."""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from prepadj.core.exceptions import BootstrapError, ConfigError
from prepadj.dataset.synthetic import SyntheticTruth, synthetic_draw
from prepadj.dataset.table import CohortTable
from prepadj.glm.bootstrap import PreparednessPipeline, bootstrap_ci
from prepadj.prepmodel.boosting import BoostParams


def _rate_gap(table: CohortTable, seed: int) -> dict[str, float]:
    """Decision-rate gap against the reference group; a cheap stand-in for the full refit."""
    frame = table.frame
    ref = frame.loc[frame["group"] == table.reference_group, "decision"].mean()
    return {
        g: float(frame.loc[frame["group"] == g, "decision"].mean() - ref)
        for g in table.groups[1:]
    }


# ---------------------------------------------------------------------------
# bootstrap_ci with a cheap pipeline
# ---------------------------------------------------------------------------

def test_se_is_sample_sd_and_ci_symmetric(small_table) -> None:
    result = bootstrap_ci(small_table, _rate_gap, replicates=30, master_seed=7)
    assert set(result.se_boot) == {"Asian", "Black"}
    for g, values in result.replicate_estimates.items():
        assert len(values) == 30
        assert result.se_boot[g] == pytest.approx(np.std(values, ddof=1))
        lo, hi = result.ci95[g]
        assert result.point[g] - lo == pytest.approx(1.96 * result.se_boot[g])
        assert hi - result.point[g] == pytest.approx(1.96 * result.se_boot[g])
    assert result.point == _rate_gap(small_table, 7)


def test_same_seed_same_replicates(small_table) -> None:
    a = bootstrap_ci(small_table, _rate_gap, replicates=10, master_seed=3)
    b = bootstrap_ci(small_table, _rate_gap, replicates=10, master_seed=3)
    c = bootstrap_ci(small_table, _rate_gap, replicates=10, master_seed=4)
    assert a.replicate_estimates == b.replicate_estimates
    assert a.replicate_estimates != c.replicate_estimates


def test_threads_do_not_change_replicates(small_table) -> None:
    serial = bootstrap_ci(small_table, _rate_gap, replicates=12, master_seed=1, threads=1)
    parallel = bootstrap_ci(small_table, _rate_gap, replicates=12, master_seed=1, threads=4)
    assert serial.model_dump() == parallel.model_dump()


def test_supplied_point_is_used(small_table) -> None:
    result = bootstrap_ci(small_table, _rate_gap, replicates=3, master_seed=0, point={"Black": 0.25})
    assert result.point == {"Black": 0.25}
    assert set(result.ci95) == {"Black"}


def test_needs_two_replicates(small_table) -> None:
    with pytest.raises(ConfigError):
        bootstrap_ci(small_table, _rate_gap, replicates=1, master_seed=0)


def test_missing_coefficient_in_replicate(small_table) -> None:
    calls = itertools.count()

    def flaky(table: CohortTable, seed: int) -> dict[str, float]:
        out = _rate_gap(table, seed)
        if next(calls) == 2:
            out.pop("Asian")
        return out

    with pytest.raises(BootstrapError, match="Asian"):
        bootstrap_ci(small_table, flaky, replicates=4, master_seed=0)


# ---------------------------------------------------------------------------
# Redraws
# ---------------------------------------------------------------------------

def test_vanished_group_triggers_redraw(small_table, monkeypatch: pytest.MonkeyPatch) -> None:
    calls = itertools.count()
    monkeypatch.setattr(
        "prepadj.glm.bootstrap._vanished",
        lambda table, sample: "forced" if next(calls) % 2 == 0 else None,
    )
    result = bootstrap_ci(small_table, _rate_gap, replicates=5, master_seed=0)
    assert result.redraws == 5


def test_redraws_exhausted(small_table, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr("prepadj.glm.bootstrap._vanished", lambda table, sample: "forced")
    with pytest.raises(BootstrapError, match="could not be drawn"):
        bootstrap_ci(small_table, _rate_gap, replicates=2, master_seed=0)


# ---------------------------------------------------------------------------
# Full refit pipeline
# ---------------------------------------------------------------------------

def test_preparedness_pipeline_bootstrap() -> None:
    draw = synthetic_draw(SyntheticTruth(seed=2), n_units=1200, n_strata=4, n_covariates=3)
    pipeline = PreparednessPipeline(BoostParams(max_depth=2, eta=0.3), rounds=5)
    result = bootstrap_ci(draw.table, pipeline, replicates=3, master_seed=11, threads=2)
    assert set(result.point) == {"Asian", "Black", "Hispanic"}
    assert all(se > 0 for se in result.se_boot.values())
    again = bootstrap_ci(draw.table, pipeline, replicates=3, master_seed=11, threads=1)
    assert again.replicate_estimates == result.replicate_estimates
