"""Deterministic hashes for run provenance."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from prepadj.core.config import RunConfig

CONFIG_HASH_CHARS = 12
_CHUNK = 1 << 20

# settings that change where or how fast results are written, not what they are
_EXCLUDED = {"out", "threads"}
# settings read only after estimate has written its outputs
_SENSITIVITY_ONLY = {"sensitivity", "calibration", "propensity_grid"}


def _digest(data: dict) -> str:
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:CONFIG_HASH_CHARS]


def config_hash(config: RunConfig) -> str:
    """SHA-256 prefix of the canonical JSON of every result-affecting setting."""
    return _digest(config.model_dump(mode="json", exclude=_EXCLUDED))


def estimate_hash(config: RunConfig) -> str:
    """Like config_hash, restricted to the settings estimate outputs depend on."""
    return _digest(config.model_dump(mode="json", exclude=_EXCLUDED | _SENSITIVITY_ONLY))


def file_hash(path: Path) -> str:
    """Full-file SHA-256."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(_CHUNK), b""):
            h.update(chunk)
    return h.hexdigest()
