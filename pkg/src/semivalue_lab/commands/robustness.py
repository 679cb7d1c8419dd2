"""Robustness report: prefix-sum verdicts per scheme plus Shapley weight properties."""

from __future__ import annotations

import logging

import click

from ..formatting import (
    build_metadata,
    format_robustness_summary,
    render_document,
    render_table,
)
from ..models import RobustnessConfig, RobustnessMode
from ..replication import check_robustness, shapley_weight_properties
from ..semivalues import WeightScheme
from .common import emit, handle_errors, load_config, parse_list, parse_schemes

logger = logging.getLogger(__name__)


def register_robustness_command(cli, get_state) -> None:
    """Register the ``robustness`` command."""

    @cli.command("robustness")
    @click.option("--n", "n_players", type=int, help="Base player count (default 20)")
    @click.option("--k-max", type=int, help="Largest replica count (default 50)")
    @click.option("--schemes", help="Schemes to check (default shapley,banzhaf,loo,robust-shapley)")
    @click.option(
        "--modes",
        help="Comma-separated subset of " + ",".join(m.value for m in RobustnessMode),
    )
    @click.option("--summary", is_flag=True, help="Also print a markdown summary to stderr")
    @click.pass_context
    @handle_errors
    def robustness(ctx, n_players, k_max, schemes, modes, summary) -> None:
        """Check every scheme's replicated weights against the robustness conditions."""
        state = get_state(ctx)
        config = load_config(
            state,
            RobustnessConfig,
            n=n_players,
            k_max=k_max,
            schemes=parse_schemes(schemes),
            modes=parse_list(modes),
            summary=summary or None,
        )
        logger.info("Robustness report for n=%d, k_max=%d", config.n, config.k_max)
        verdicts = [
            check_robustness(WeightScheme.parse(name), config.n, config.k_max, mode)
            for name in config.schemes
            for mode in config.modes
        ]
        weights = shapley_weight_properties(config.n, config.k_max)
        metadata = build_metadata("robustness", config.seed, config)
        if config.summary:
            click.echo(format_robustness_summary(verdicts, weights), err=True)

        if config.format == "json":
            payload = {
                "verdicts": [v.model_dump(mode="json", by_alias=True) for v in verdicts],
                "shapley_weight_properties": weights.model_dump(mode="json"),
            }
            emit(render_document(payload, metadata), config.out)
            return
        rows = [
            {
                "scheme": v.scheme,
                "mode": v.mode.value,
                "robust": v.robust,
                "violations": len(v.failing),
            }
            for v in verdicts
        ]
        emit(render_table(rows, "csv", metadata), config.out)
