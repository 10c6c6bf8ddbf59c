"""Output artifacts: CSV tables and JSON documents stamped with run provenance."""

from __future__ import annotations

import json
from collections.abc import Iterable
from pathlib import Path

import pandas as pd
from pydantic import BaseModel

from prepadj import __version__
from prepadj.core.exceptions import ConfigError, MissingArtifactError


class Provenance(BaseModel):
    config_hash: str
    estimate_hash: str
    seed: int
    version: str = __version__
    input_hash: str | None = None


def ensure_writable(paths: Iterable[Path], force: bool) -> None:
    """Refuse to overwrite existing outputs unless forced."""
    existing = [str(p) for p in paths if Path(p).exists()]
    if existing and not force:
        raise ConfigError(f"Output already exists: {', '.join(existing)} (use --force to overwrite)")


def write_table(frame: pd.DataFrame, path: Path, provenance: Provenance) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stamped = frame.copy()
    stamped["config_hash"] = provenance.config_hash
    stamped["seed"] = provenance.seed
    stamped.to_csv(path, index=False, lineterminator="\n")
    return path


def write_json(data: dict, path: Path, provenance: Provenance) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"provenance": provenance.model_dump(), **data}
    path.write_text(json.dumps(document, indent=2) + "\n")
    return path


def read_json(path: Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"Missing upstream artifact {path}; run the producing command first")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise MissingArtifactError(f"Artifact {path} is unreadable: {e}") from e


def read_table(path: Path) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(f"Missing upstream artifact {path}; run the producing command first")
    return pd.read_csv(path, dtype={"unit_id": str, "config_hash": str})
