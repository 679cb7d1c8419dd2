"""Verify command: structural assumptions of a game file."""

from __future__ import annotations

import logging

import click

from ..formatting import build_metadata, format_assumption_reports, render_response
from ..game import Game, verify_replication_redundancy, verify_submodularity
from ..models import VerifyConfig
from .common import UsageFailure, emit, handle_errors, load_config, load_game_spec, parse_list

logger = logging.getLogger(__name__)


def register_verify_command(cli, get_state) -> None:
    """Register the ``verify`` command."""

    @cli.command("verify")
    @click.option("--game", type=click.Path(dir_okay=False), help="Game JSON or utility CSV")
    @click.option("--replicas", help="Comma-separated replica indices to check for redundancy")
    @click.pass_context
    @handle_errors
    def verify(ctx, game, replicas) -> None:
        """Check submodularity and, with --replicas, replica redundancy. Exits 1 on failure."""
        state = get_state(ctx)
        config = load_config(state, VerifyConfig, game=game, replicas=parse_list(replicas, int))
        if config.game is None:
            raise UsageFailure("verify needs a game: pass --game or set 'game' in --config")
        spec = load_game_spec(config)
        logger.info("Verifying assumptions on %d players", spec.n_players)

        loaded = Game(spec, state.lab_config)
        reports = [verify_submodularity(loaded)]
        if config.replicas:
            reports.append(verify_replication_redundancy(loaded, config.replicas))

        data = {
            "metadata": build_metadata("verify", config.seed, config),
            "reports": [r.model_dump(mode="json") for r in reports],
        }
        markdown = format_assumption_reports(reports, f"Assumptions ({spec.n_players} players)")
        fmt = "json" if config.format == "json" else "markdown"
        emit(render_response(fmt, markdown, data) + "\n", config.out)
        if not all(r.holds for r in reports):
            ctx.exit(1)
