"""Options shared by the pipeline commands."""

from __future__ import annotations

from pathlib import Path

import typer

ConfigOption = typer.Option(None, "--config", "-c", help="TOML run file")
OutOption = typer.Option(None, "--out", "-o", help="Output directory (overrides the config)")
SeedOption = typer.Option(None, "--seed", help="Master seed (overrides the config)")
ForceOption = typer.Option(False, "--force", help="Overwrite existing outputs")
ThreadsOption = typer.Option(None, "--threads", help="Worker threads for CV, bootstrap and grid cells")


def overrides(out: Path | None, seed: int | None, threads: int | None) -> dict:
    return {"out": out, "seed": seed, "threads": threads}
