"""Root Typer app."""

from __future__ import annotations

import json

import typer

from prepadj import __version__

app = typer.Typer(
    name="prepadj",
    help="Preparedness-adjusted disparity estimates with confounding sensitivity bands.",
    add_completion=False,
    no_args_is_help=True,
)


@app.command("version")
def version_cmd() -> None:
    """Print version info as JSON."""
    print(json.dumps({"version": __version__, "package": "prepadj"}))


# --- Register direct commands ---

from prepadj.cli.simulate import register as register_simulate  # noqa: E402
from prepadj.cli.estimate import register as register_estimate  # noqa: E402
from prepadj.cli.sensitivity import register as register_sensitivity  # noqa: E402
from prepadj.cli.report import register as register_report  # noqa: E402
from prepadj.cli.config_cmd import config_app  # noqa: E402

register_simulate(app)
register_estimate(app)
register_sensitivity(app)
register_report(app)
app.add_typer(config_app, name="config", help="Show configuration")


def main() -> None:
    app()


if __name__ == "__main__":
    main()
