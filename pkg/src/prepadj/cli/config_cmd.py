"""prepadj config command: show the resolved configuration."""

from __future__ import annotations

from pathlib import Path

import typer

from prepadj.cli.options import ConfigOption, OutOption, SeedOption, overrides
from prepadj.cli.output import fail, output_json
from prepadj.core.config import get_config
from prepadj.core.exceptions import PrepAdjError
from prepadj.utils.hashing import config_hash

config_app = typer.Typer()


@config_app.command("show")
def config_show(
    config: Path = ConfigOption,
    out: Path = OutOption,
    seed: int = SeedOption,
) -> None:
    """Show the configuration after file, environment and flag resolution."""
    try:
        cfg = get_config(config, overrides(out, seed, None))
    except PrepAdjError as e:
        fail(e)
    output_json({"config": cfg.model_dump(mode="json"), "config_hash": config_hash(cfg)}, pretty=True)
