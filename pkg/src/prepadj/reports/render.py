"""Rich tables for the estimate and sensitivity outputs (stderr)."""

from __future__ import annotations

import math

import pandas as pd
from rich.console import Console
from rich.table import Table

_console = Console(stderr=True)

_STAMP_COLUMNS = ("config_hash", "seed")


def render_fit_table(frame: pd.DataFrame, console: Console | None = None) -> None:
    console = console or _console
    table = Table(title="Odds of the decision (OR, log-odds SE)", show_lines=False)
    columns = [c for c in frame.columns if c not in _STAMP_COLUMNS]
    for col in columns:
        table.add_column(str(col), justify="left" if col == "term" else "right")
    for _, row in frame.iterrows():
        table.add_row(*["" if pd.isna(row[c]) else str(row[c]) for c in columns])
    console.print(table)


def render_band(band: dict, console: Console | None = None) -> None:
    console = console or _console
    table = Table(title=f"Sensitivity band (theta = {band['theta_cap']:.3f})")
    for name in ("group", "OR min", "OR max", "CI low", "CI high", "zero cell", "zero-cell gap (SE)"):
        table.add_column(name, justify="left" if name == "group" else "right")
    gaps = band.get("zero_cell_gap_se") or {}
    for group, (lo, hi) in band["band"].items():
        ci_lo, ci_hi = band["band_ci"][group]
        gap = gaps.get(group)
        table.add_row(
            group,
            f"{math.exp(lo):.2f}",
            f"{math.exp(hi):.2f}",
            f"{math.exp(ci_lo):.2f}",
            f"{math.exp(ci_hi):.2f}",
            f"{math.exp(band['zero_cell'][group]):.2f}",
            "" if gap is None else f"{gap:+.2f}",
        )
    console.print(table)
