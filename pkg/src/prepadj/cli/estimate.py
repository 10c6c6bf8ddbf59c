"""prepadj estimate command."""

from __future__ import annotations

from pathlib import Path

import typer

from prepadj.cli.options import ConfigOption, ForceOption, OutOption, SeedOption, ThreadsOption, overrides
from prepadj.cli.output import fail, output_json, progress
from prepadj.core.config import get_config
from prepadj.core.exceptions import PrepAdjError
from prepadj.pipeline.estimate import run_estimate


def register(app: typer.Typer) -> None:
    @app.command("estimate")
    def estimate(
        config: Path = ConfigOption,
        out: Path = OutOption,
        seed: int = SeedOption,
        force: bool = ForceOption,
        threads: int = ThreadsOption,
        model_in: Path = typer.Option(None, "--model-in", help="Reuse a saved preparedness model"),
        model_out: Path = typer.Option(None, "--model-out", help="Also save the preparedness model here"),
    ) -> None:
        """Fit the preparedness model, adjusted and baseline regressions, and bootstrap CIs."""
        try:
            cfg = get_config(config, overrides(out, seed, threads))
            progress(f"Estimating into {cfg.out}")
            result = run_estimate(cfg, force=force, model_in=model_in, model_out=model_out)
        except PrepAdjError as e:
            fail(e)
        output_json(result)
