"""Command output. One JSON summary on stdout; messages on stderr."""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Any, NoReturn

import numpy as np
import typer

from prepadj.core.exceptions import PrepAdjError


def _encode(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    return str(value)


def output_json(data: dict | list, pretty: bool = False) -> None:
    """Write a summary to stdout; numpy values become plain numbers."""
    print(json.dumps(data, indent=2 if pretty else None, default=_encode))


def error(message: str) -> None:
    print(f"Error: {message}", file=sys.stderr)


def warn(message: str) -> None:
    print(f"Warning: {message}", file=sys.stderr)


def progress(message: str) -> None:
    print(message, file=sys.stderr)


def fail(exc: PrepAdjError) -> NoReturn:
    """Report a pipeline error with its stage and exit with the error's code."""
    error(f"{exc.stage}: {exc}" if exc.stage else str(exc))
    raise typer.Exit(exc.exit_code)
