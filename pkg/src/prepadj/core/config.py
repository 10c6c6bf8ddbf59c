"""Run configuration from a TOML file, PREPADJ_ environment variables, .env and CLI flags."""

from __future__ import annotations

import os
import sys
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from prepadj.core.constants import (
    DEFAULT_Q_STEP,
    DEFAULT_REPLICATES,
    DEFAULT_THETA,
    DEFAULT_TRAIN_FRACTION,
    THETA_SLACK,
)
from prepadj.core.exceptions import ConfigError
from prepadj.dataset.schema import ColumnSchema
from prepadj.dataset.synthetic import SyntheticTruth
from prepadj.glm.regressions import CovariateSets
from prepadj.prepmodel.selection import HyperGrid
from prepadj.sensitivity.grid import SensitivityGrid, default_grid, q_values

ENV_PREFIX = "PREPADJ_"


class SyntheticSpec(BaseModel):
    truth: SyntheticTruth = Field(default_factory=SyntheticTruth)
    n_units: int = 5000
    n_strata: int = 20
    n_covariates: int = 6


class BootstrapConfig(BaseModel):
    replicates: int = Field(DEFAULT_REPLICATES, ge=2)
    seed: int | None = None


class SensitivityGridConfig(BaseModel):
    """Explicit alpha/delta/q lists, or the default log-integer grid up to theta_cap."""

    theta_cap: float = Field(DEFAULT_THETA, ge=0.0)
    q_step: float = Field(DEFAULT_Q_STEP, gt=0.0, le=1.0)
    alpha: list[float] | None = None
    delta: list[float] | None = None
    q_ref: list[float] | None = None
    q_alt: list[float] | None = None

    def build(self, theta_cap: float | None = None) -> SensitivityGrid:
        cap = self.theta_cap if theta_cap is None else theta_cap
        base = default_grid(cap, self.q_step)
        try:
            return SensitivityGrid(
                alpha=self.alpha if self.alpha is not None else base.alpha,
                delta=self.delta if self.delta is not None else base.delta,
                q_ref=self.q_ref if self.q_ref is not None else q_values(self.q_step),
                q_alt=self.q_alt if self.q_alt is not None else q_values(self.q_step),
                theta_cap=cap,
            )
        except ValidationError as e:
            raise ConfigError(f"Invalid sensitivity grid: {e}") from e


class CalibrationConfig(BaseModel):
    benchmark: str | None = None
    companions: list[str] = Field(default_factory=list)
    slack: float = THETA_SLACK


class RunConfig(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix=ENV_PREFIX,
        env_nested_delimiter="__",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    seed: int
    input: Path | None = None
    synthetic: SyntheticSpec | None = None
    columns: ColumnSchema = Field(default_factory=ColumnSchema)
    features: list[str] | None = None
    covariate_sets: CovariateSets = Field(default_factory=CovariateSets)
    grid: HyperGrid = Field(default_factory=HyperGrid)
    propensity_grid: HyperGrid | None = None
    train_fraction: float = Field(DEFAULT_TRAIN_FRACTION, gt=0.0, lt=1.0)
    ridge: float = Field(0.0, ge=0.0)
    bootstrap: BootstrapConfig = Field(default_factory=BootstrapConfig)
    sensitivity: SensitivityGridConfig = Field(default_factory=SensitivityGridConfig)
    calibration: CalibrationConfig = Field(default_factory=CalibrationConfig)
    out: Path = Path("out")
    threads: int = Field(1, ge=1)

    @field_validator("features")
    @classmethod
    def _features_nonempty(cls, v: list[str] | None) -> list[str] | None:
        if v is not None and not v:
            raise ValueError("features must name at least one column")
        return v

    @model_validator(mode="after")
    def _one_source(self) -> RunConfig:
        if (self.input is None) == (self.synthetic is None):
            raise ValueError("exactly one of 'input' and 'synthetic' must be set")
        return self

    @property
    def bootstrap_seed(self) -> int:
        return self.seed if self.bootstrap.seed is None else self.bootstrap.seed


def _load_config_file(path: Path) -> dict:
    """Read a TOML run file into a dict."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        return tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid TOML: {e}") from e


def _without_env_keys(data: dict, prefix: str = ENV_PREFIX) -> dict:
    """Drop file keys whose PREPADJ_ variable is set, recursing into sections."""
    kept: dict = {}
    for key, value in data.items():
        env_name = f"{prefix}{key.upper()}"
        if isinstance(value, dict):
            kept[key] = _without_env_keys(value, f"{env_name}__")
        elif env_name not in os.environ:
            kept[key] = value
    return kept


def get_config(path: Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Create config with priority: flags > env vars > config file > defaults."""
    file_data = _load_config_file(path) if path is not None else {}
    init_kwargs = _without_env_keys(file_data)
    if path is not None and "input" in init_kwargs:
        # relative input paths resolve against the config file's directory
        source = Path(init_kwargs["input"])
        if not source.is_absolute():
            init_kwargs["input"] = Path(path).parent / source
    for key, value in (overrides or {}).items():
        if value is not None:
            init_kwargs[key] = value
    try:
        return RunConfig(**init_kwargs)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e
