"""prepadj report command."""

from __future__ import annotations

from pathlib import Path

import typer

from prepadj.cli.output import fail, output_json, warn
from prepadj.core.constants import BAND_FILE, BOOTSTRAP_FILE, FIT_TABLE_FILE
from prepadj.core.exceptions import PrepAdjError
from prepadj.reports.artifacts import read_json, read_table
from prepadj.reports.render import render_band, render_fit_table


def register(app: typer.Typer) -> None:
    @app.command("report")
    def report(
        out: Path = typer.Option(Path("out"), "--out", "-o", help="Directory holding estimate/sensitivity outputs"),
    ) -> None:
        """Print the odds-ratio table and sensitivity bands; JSON summary on stdout."""
        try:
            table = read_table(out / FIT_TABLE_FILE)
            boot = read_json(out / BOOTSTRAP_FILE)
        except PrepAdjError as e:
            fail(e)
        render_fit_table(table)
        summary: dict = {
            "provenance": boot["provenance"],
            "ci95": boot["bootstrap"]["ci95"],
            "se_boot": boot["bootstrap"]["se_boot"],
        }
        if (out / BAND_FILE).exists():
            band = read_json(out / BAND_FILE)
            render_band(band)
            summary["band"] = band["band"]
            summary["band_ci"] = band["band_ci"]
            summary["theta_cap"] = band["theta_cap"]
        else:
            warn(f"No {BAND_FILE} in {out}; run `prepadj sensitivity` for bands")
        output_json(summary)
