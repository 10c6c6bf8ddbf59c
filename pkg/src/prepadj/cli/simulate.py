"""prepadj simulate command."""

from __future__ import annotations

from pathlib import Path

import typer

from prepadj.cli.options import ConfigOption, ForceOption, OutOption, SeedOption, overrides
from prepadj.cli.output import fail, output_json, progress
from prepadj.core.config import get_config
from prepadj.core.exceptions import PrepAdjError
from prepadj.pipeline.simulate import run_simulate


def register(app: typer.Typer) -> None:
    @app.command("simulate")
    def simulate(
        config: Path = ConfigOption,
        out: Path = OutOption,
        seed: int = SeedOption,
        force: bool = ForceOption,
    ) -> None:
        """Generate a synthetic cohort CSV plus its ground-truth JSON."""
        try:
            cfg = get_config(config, overrides(out, seed, None))
            progress(f"Simulating into {cfg.out}")
            result = run_simulate(cfg, force=force)
        except PrepAdjError as e:
            fail(e)
        output_json(result)
