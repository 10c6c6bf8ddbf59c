"""Allow running as `python -m prepadj`."""

from prepadj.cli.app import main

main()
