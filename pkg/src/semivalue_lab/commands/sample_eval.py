"""Sampling evaluation: estimated payoffs against the exact values over repeated runs."""

from __future__ import annotations

import logging

import click
import numpy as np
import pandas as pd

from ..errors import CoverageError
from ..formatting import build_metadata, render_table
from ..game import Game
from ..models import SampleEvalConfig
from ..sampling import approximate_semivalue
from ..semivalues import WeightScheme, exact_payoffs_all
from .common import UsageFailure, emit, handle_errors, load_config, load_game_spec, parse_list

logger = logging.getLogger(__name__)


def relative_error(estimate: np.ndarray, exact: np.ndarray) -> np.ndarray:
    """``|estimate − exact| / |exact|``, falling back to the absolute error where ``exact`` is 0."""
    gap = np.abs(estimate - exact)
    scale = np.abs(exact)
    return np.where(scale > 0, gap / np.where(scale > 0, scale, 1.0), gap)


def sample_eval_rows(game: Game, config: SampleEvalConfig) -> list[dict]:
    scheme = WeightScheme.parse(config.scheme)
    exact = exact_payoffs_all(game, scheme)
    seeds = np.random.SeedSequence(config.seed).spawn(config.runs)
    rows = []
    for run, seed in enumerate(seeds):
        try:
            estimates = approximate_semivalue(game, scheme, config.budget, config.q, seed)
        except CoverageError as exc:
            raise UsageFailure(f"run {run}: {exc}") from exc
        errors = relative_error(estimates.phi_prime, exact)
        rows.extend(
            {
                "run": str(run),
                "player": i,
                "exact": float(exact[i]),
                "phi_hat": float(estimates.phi_hat[i]),
                "phi_prime": float(estimates.phi_prime[i]),
                "rel_error": float(errors[i]),
            }
            for i in range(game.n_players)
        )

    frame = pd.DataFrame(rows)
    summary = frame.groupby("player")[["phi_hat", "phi_prime", "rel_error"]].agg(["mean", "std"])
    for stat in ("mean", "std"):
        rows.extend(
            {
                "run": stat,
                "player": int(i),
                "exact": float(exact[i]),
                "phi_hat": float(summary.loc[i, ("phi_hat", stat)]),
                "phi_prime": float(summary.loc[i, ("phi_prime", stat)]),
                "rel_error": float(summary.loc[i, ("rel_error", stat)]),
            }
            for i in summary.index
        )
    return rows


def register_sample_eval_command(cli, get_state) -> None:
    """Register the ``sample-eval`` command."""

    @cli.command("sample-eval")
    @click.option("--game", type=click.Path(dir_okay=False), help="Game JSON or utility CSV")
    @click.option("--scheme", help="Weight scheme (default shapley)")
    @click.option("--budget", type=int, help="Sampled coalitions per run (default 256)")
    @click.option("--q", "q", help="'uniform', 'exhaustive' or comma-separated weights for sizes 0..N")
    @click.option("--runs", type=int, help="Independent runs (default 10)")
    @click.pass_context
    @handle_errors
    def sample_eval(ctx, game, scheme, budget, q, runs) -> None:
        """Compare sampled estimates with exact payoffs."""
        state = get_state(ctx)
        if q is not None and q not in ("uniform", "exhaustive"):
            q = parse_list(q, float)
        config = load_config(
            state,
            SampleEvalConfig,
            game=game,
            scheme=scheme,
            budget=budget,
            q=q,
            runs=runs,
        )
        spec = load_game_spec(config)
        logger.info(
            "Sampling %s on %d players: budget=%d, runs=%d",
            config.scheme,
            spec.n_players,
            config.budget,
            config.runs,
        )
        rows = sample_eval_rows(Game(spec, state.lab_config), config)
        metadata = build_metadata("sample-eval", config.seed, config)
        emit(render_table(rows, config.format, metadata), config.out)
