"""Tests for config loading: flags > env vars > TOML file > defaults."""

from __future__ import annotations

import math
import os
from pathlib import Path

import pytest

from prepadj.core.config import SensitivityGridConfig, _load_config_file, get_config
from prepadj.core.exceptions import ConfigError
from prepadj.utils.hashing import config_hash, estimate_hash

BASE_TOML = """
seed = 1
input = "data/cohort.csv"

[bootstrap]
seed = 3
replicates = 50

[grid]
max_depth = [2, 3]
folds = 3
"""


@pytest.fixture(autouse=True)
def clean_env(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    for key in list(os.environ):
        if key.startswith("PREPADJ_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)


@pytest.fixture()
def cfg_file(tmp_path: Path) -> Path:
    path = tmp_path / "run.toml"
    path.write_text(BASE_TOML)
    return path


# ---------------------------------------------------------------------------
# File loading
# ---------------------------------------------------------------------------

def test_load_config_file_missing(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match="not found"):
        _load_config_file(tmp_path / "nope.toml")


def test_load_config_file_invalid_toml(tmp_path: Path) -> None:
    bad = tmp_path / "run.toml"
    bad.write_text("seed = = 3 [[[")
    with pytest.raises(ConfigError, match="TOML"):
        _load_config_file(bad)


def test_file_values_and_defaults(cfg_file: Path) -> None:
    config = get_config(cfg_file)
    assert config.seed == 1
    assert config.grid.max_depth == [2, 3]
    assert config.grid.folds == 3
    assert config.grid.rounds == 300
    assert config.bootstrap.replicates == 50
    assert config.train_fraction == 0.9
    assert config.threads == 1


def test_relative_input_resolves_against_file(cfg_file: Path) -> None:
    config = get_config(cfg_file)
    assert config.input == cfg_file.parent / "data" / "cohort.csv"


def test_bootstrap_seed_defaults_to_run_seed(tmp_path: Path) -> None:
    path = tmp_path / "run.toml"
    path.write_text('seed = 8\ninput = "x.csv"\n')
    assert get_config(path).bootstrap_seed == 8
    assert get_config(path, {"bootstrap": {"seed": 2}}).bootstrap_seed == 2


# ---------------------------------------------------------------------------
# Priority
# ---------------------------------------------------------------------------

def test_env_var_overrides_config_file(cfg_file: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("PREPADJ_SEED", "99")
    config = get_config(cfg_file)
    assert config.seed == 99
    assert config.grid.folds == 3


def test_nested_env_var_overrides_one_key(cfg_file: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("PREPADJ_BOOTSTRAP__REPLICATES", "7")
    config = get_config(cfg_file)
    assert config.bootstrap.replicates == 7
    assert config.bootstrap.seed == 3


def test_flags_override_env(cfg_file: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("PREPADJ_SEED", "99")
    config = get_config(cfg_file, {"seed": 5, "out": Path("elsewhere"), "threads": None})
    assert config.seed == 5
    assert config.out == Path("elsewhere")
    assert config.threads == 1


def test_dotenv_file_is_read(tmp_path: Path) -> None:
    (tmp_path / ".env").write_text("PREPADJ_SEED=12\nPREPADJ_INPUT=cohort.csv\n")
    config = get_config()
    assert config.seed == 12


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def test_needs_exactly_one_source(tmp_path: Path) -> None:
    path = tmp_path / "run.toml"
    path.write_text("seed = 1\n")
    with pytest.raises(ConfigError, match="exactly one"):
        get_config(path)
    path.write_text('seed = 1\ninput = "a.csv"\n[synthetic]\nn_units = 500\n')
    with pytest.raises(ConfigError, match="exactly one"):
        get_config(path)


def test_seed_required(tmp_path: Path) -> None:
    path = tmp_path / "run.toml"
    path.write_text('input = "a.csv"\n')
    with pytest.raises(ConfigError, match="seed"):
        get_config(path)


def test_bad_train_fraction(cfg_file: Path) -> None:
    with pytest.raises(ConfigError):
        get_config(cfg_file, {"train_fraction": 1.0})


def test_bootstrap_needs_two_replicates(cfg_file: Path) -> None:
    with pytest.raises(ConfigError):
        get_config(cfg_file, {"bootstrap": {"replicates": 1}})


# ---------------------------------------------------------------------------
# Sensitivity grid section
# ---------------------------------------------------------------------------

def test_default_sensitivity_grid() -> None:
    grid = SensitivityGridConfig().build()
    assert len(grid.alpha) == 5 and len(grid.q_ref) == 11
    assert grid.theta_cap == pytest.approx(math.log(3))


def test_theta_override_rebuilds_effects() -> None:
    grid = SensitivityGridConfig(q_step=0.5).build(math.log(2))
    assert grid.alpha == pytest.approx([-math.log(2), 0.0, math.log(2)])
    assert grid.q_alt == [0.0, 0.5, 1.0]


def test_explicit_grid_without_zero_rejected() -> None:
    with pytest.raises(ConfigError, match="sensitivity grid"):
        SensitivityGridConfig(alpha=[0.5]).build()


# ---------------------------------------------------------------------------
# Config hash
# ---------------------------------------------------------------------------

def test_config_hash_ignores_output_location(cfg_file: Path) -> None:
    a = get_config(cfg_file, {"out": Path("a"), "threads": 1})
    b = get_config(cfg_file, {"out": Path("b"), "threads": 8})
    c = get_config(cfg_file, {"seed": 2})
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(c)
    assert len(config_hash(a)) == 12


def test_estimate_hash_ignores_sensitivity_settings(cfg_file: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    base = get_config(cfg_file)
    monkeypatch.setenv("PREPADJ_SENSITIVITY__Q_STEP", "0.5")
    monkeypatch.setenv("PREPADJ_CALIBRATION__BENCHMARK", "gpa")
    tuned = get_config(cfg_file)
    assert config_hash(tuned) != config_hash(base)
    assert estimate_hash(tuned) == estimate_hash(base)
    assert estimate_hash(get_config(cfg_file, {"seed": 2})) != estimate_hash(base)
