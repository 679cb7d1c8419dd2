"""Command group and command registration for semivalue-lab."""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Optional

import click

from .commands.common import CliState, UsageFailure
from .commands.facility_bench import register_facility_bench_command
from .commands.robustness import register_robustness_command
from .commands.sample_eval import register_sample_eval_command
from .commands.sweep import register_sweep_command
from .commands.verify import register_verify_command
from .config import LabConfig

logger = logging.getLogger(__name__)


def get_state(ctx: click.Context) -> CliState:
    """Retrieve the global flags stored by the group callback."""
    state = ctx.find_object(CliState)
    if state is None:
        raise RuntimeError("CliState not initialized; command invoked outside the cli group")
    return state


@click.group()
@click.option("--seed", type=int, default=None, help="Random seed recorded in every output")
@click.option(
    "--out",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Output file (default stdout)",
)
@click.option(
    "--format", "fmt", type=click.Choice(["csv", "json"]), default=None, help="Output format"
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="JSON config file; flags override its fields",
)
@click.option("--log-level", default="WARNING", help="Logging level")
@click.pass_context
def cli(
    ctx: click.Context,
    seed: Optional[int],
    out: Optional[Path],
    fmt: Optional[str],
    config_path: Optional[Path],
    log_level: str,
) -> None:
    """Semivalues, replication robustness and fast facility solvers."""
    logging.basicConfig(
        level=getattr(logging, log_level.upper(), logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        lab_config = LabConfig.from_env()
    except ValueError as exc:
        raise UsageFailure(str(exc)) from exc
    logger.debug("Numerics: %s", lab_config)
    ctx.obj = CliState(
        seed=seed, out=out, fmt=fmt, config_path=config_path, lab_config=lab_config
    )


# ── Register all commands ──────────────────────────────────────────────────

register_sweep_command(cli, get_state)
register_robustness_command(cli, get_state)
register_facility_bench_command(cli, get_state)
register_sample_eval_command(cli, get_state)
register_verify_command(cli, get_state)
