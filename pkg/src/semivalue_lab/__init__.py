"""semivalue-lab: entry point for the CLI."""

from __future__ import annotations


def main() -> None:
    """Run the semivalue-lab command group."""
    from .cli import cli

    cli(prog_name="semivalue-lab")


if __name__ == "__main__":
    main()
