"""Replication sweep: total payoff of one player as its replica count grows."""

from __future__ import annotations

import logging
from typing import Optional

import click

from ..errors import SchemeError
from ..formatting import build_metadata, render_table
from ..game import Game
from ..models import SweepConfig
from ..replication import limit_total_payoff, total_payoff_curve
from ..semivalues import WeightScheme
from .common import emit, handle_errors, load_config, load_game_spec, parse_schemes

logger = logging.getLogger(__name__)


def sweep_rows(game: Game, config: SweepConfig) -> list[dict]:
    rows = []
    for name in config.schemes:
        scheme = WeightScheme.parse(name)
        logger.debug("Sweeping %s for player %d up to k=%d", scheme, config.malicious, config.k_max)
        curve = total_payoff_curve(game, scheme, config.malicious, config.k_max)
        try:
            limit: Optional[float] = limit_total_payoff(game, scheme, config.malicious)
        except SchemeError:
            limit = None
        rows.extend(
            {"k": k, "scheme": str(scheme), "phi_tot": float(value), "limit": limit}
            for k, value in enumerate(curve)
        )
    return rows


def register_sweep_command(cli, get_state) -> None:
    """Register the ``sweep`` command."""

    @cli.command("sweep")
    @click.option("--game", type=click.Path(dir_okay=False), help="Game JSON or utility CSV")
    @click.option("--malicious", type=int, help="Player that replicates (default 0)")
    @click.option(
        "--schemes",
        help="Comma-separated schemes (default shapley,banzhaf); separate with ';' when using custom:",
    )
    @click.option("--k-max", type=int, help="Largest replica count (default 50)")
    @click.pass_context
    @handle_errors
    def sweep(ctx, game, malicious, schemes, k_max) -> None:
        """Total payoff of a replicating player for k = 0..k_max."""
        state = get_state(ctx)
        config = load_config(
            state,
            SweepConfig,
            game=game,
            malicious=malicious,
            schemes=parse_schemes(schemes),
            k_max=k_max,
        )
        spec = load_game_spec(config)
        if config.malicious >= spec.n_players:
            raise click.BadParameter(
                f"player {config.malicious} outside game of {spec.n_players} players",
                param_hint="--malicious",
            )
        logger.info("Replication sweep over %d players, k_max=%d", spec.n_players, config.k_max)
        rows = sweep_rows(Game(spec, state.lab_config), config)
        metadata = build_metadata("sweep", config.seed, config)
        emit(render_table(rows, config.format, metadata), config.out)
