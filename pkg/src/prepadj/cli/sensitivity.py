"""prepadj sensitivity command."""

from __future__ import annotations

from pathlib import Path

import typer

from prepadj.cli.options import ConfigOption, ForceOption, OutOption, SeedOption, ThreadsOption, overrides
from prepadj.cli.output import fail, output_json, progress
from prepadj.core.config import get_config
from prepadj.core.exceptions import PrepAdjError
from prepadj.pipeline.sensitivity import run_sensitivity


def register(app: typer.Typer) -> None:
    @app.command("sensitivity")
    def sensitivity(
        config: Path = ConfigOption,
        out: Path = OutOption,
        seed: int = SeedOption,
        force: bool = ForceOption,
        threads: int = ThreadsOption,
        theta: float = typer.Option(None, "--theta", help="Cap on |alpha| and |delta| (skips calibration)"),
    ) -> None:
        """Bound the adjusted estimates under a binary unmeasured confounder."""
        try:
            cfg = get_config(config, overrides(out, seed, threads))
            progress(f"Sensitivity analysis in {cfg.out}")
            result = run_sensitivity(cfg, force=force, theta=theta)
        except PrepAdjError as e:
            fail(e)
        output_json(result)
