"""Axiom predicates for semivalues: efficiency, symmetry, null player, linearity, 2-efficiency."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .game import Game, as_game
from .models import GameSpec, TableValuation
from .semivalues import WeightScheme, exact_payoffs_all


@dataclass(frozen=True)
class AxiomCheck:
    holds: bool
    lhs: float
    rhs: float


def _table_game(values: np.ndarray, n: int) -> GameSpec:
    return GameSpec(
        n_players=n,
        valuation=TableValuation(values=tuple(float(v) for v in values)),
    )


def _check_pair(game: Game, i: int, j: int) -> None:
    n = game.n_players
    for p in (i, j):
        if not 0 <= p < n:
            raise PreconditionError(f"player {p} outside game of {n} players")
    if i == j:
        raise PreconditionError("axioms on a pair need two distinct players")


def add_games(g1: Game | GameSpec, g2: Game | GameSpec) -> GameSpec:
    """Pointwise sum ``v1 + v2`` as a table game."""
    g1, g2 = as_game(g1), as_game(g2)
    if g1.n_players != g2.n_players:
        raise PreconditionError(
            f"cannot add games on {g1.n_players} and {g2.n_players} players"
        )
    return _table_game(g1.value_table() + g2.value_table(), g1.n_players)


def merge_players(game: Game | GameSpec, i: int, j: int) -> GameSpec:
    """Contract players ``i`` and ``j`` into one.

    The merged player sits at ``min(i, j)``; ``max(i, j)`` is removed and the
    players above it shift down by one.
    """
    game = as_game(game)
    _check_pair(game, i, j)
    n = game.n_players
    if n < 2:
        raise PreconditionError("merging needs at least two players")
    keep, drop = min(i, j), max(i, j)
    masks = np.arange(2 ** (n - 1), dtype=np.int64)
    low = masks & ((1 << drop) - 1)
    high = (masks >> drop) << (drop + 1)
    expanded = low | high
    expanded = np.where(expanded & (1 << keep), expanded | (1 << drop), expanded)
    return _table_game(game.value_table()[expanded], n - 1)


def is_symmetric_pair(game: Game | GameSpec, i: int, j: int) -> bool:
    """True when ``v(S ∪ {i}) = v(S ∪ {j})`` for every ``S`` avoiding both."""
    game = as_game(game)
    _check_pair(game, i, j)
    table = game.value_table()
    masks = np.arange(2**game.n_players, dtype=np.int64)
    free = masks[(masks & (1 << i | 1 << j)) == 0]
    gap = table[free | 1 << i] - table[free | 1 << j]
    return bool(np.all(np.abs(gap) <= game.config.tolerance))


def is_null_player(game: Game | GameSpec, i: int) -> bool:
    game = as_game(game)
    table = game.value_table()
    masks = np.arange(2**game.n_players, dtype=np.int64)
    free = masks[(masks & 1 << i) == 0]
    return bool(np.all(np.abs(table[free | 1 << i] - table[free]) <= game.config.tolerance))


def check_efficiency(game: Game | GameSpec, scheme: WeightScheme) -> AxiomCheck:
    """Payoffs add up to ``v(N) − v(∅)``."""
    game = as_game(game)
    table = game.value_table()
    lhs = float(np.sum(exact_payoffs_all(game, scheme)))
    rhs = float(table[-1] - table[0])
    return AxiomCheck(abs(lhs - rhs) <= game.config.tolerance, lhs, rhs)


def check_symmetry(game: Game | GameSpec, scheme: WeightScheme, i: int, j: int) -> AxiomCheck:
    game = as_game(game)
    if not is_symmetric_pair(game, i, j):
        raise PreconditionError(f"players {i} and {j} are not interchangeable in this game")
    payoffs = exact_payoffs_all(game, scheme)
    lhs, rhs = float(payoffs[i]), float(payoffs[j])
    return AxiomCheck(abs(lhs - rhs) <= game.config.tolerance, lhs, rhs)


def check_null_player(game: Game | GameSpec, scheme: WeightScheme, i: int) -> AxiomCheck:
    game = as_game(game)
    if not is_null_player(game, i):
        raise PreconditionError(f"player {i} contributes to some coalition")
    lhs = float(exact_payoffs_all(game, scheme)[i])
    return AxiomCheck(abs(lhs) <= game.config.tolerance, lhs, 0.0)


def check_linearity(
    g1: Game | GameSpec, g2: Game | GameSpec, scheme: WeightScheme
) -> AxiomCheck:
    """``φ(v1 + v2) = φ(v1) + φ(v2)``, reported at the worst player."""
    g1, g2 = as_game(g1), as_game(g2)
    combined = Game(add_games(g1, g2), g1.config)
    lhs = exact_payoffs_all(combined, scheme)
    rhs = exact_payoffs_all(g1, scheme) + exact_payoffs_all(g2, scheme)
    worst = int(np.argmax(np.abs(lhs - rhs)))
    return AxiomCheck(
        bool(abs(lhs[worst] - rhs[worst]) <= g1.config.tolerance),
        float(lhs[worst]),
        float(rhs[worst]),
    )


def check_two_efficiency(
    game: Game | GameSpec, scheme: WeightScheme, i: int, j: int
) -> AxiomCheck:
    """The merged player's payoff equals the sum of the two it replaces."""
    game = as_game(game)
    merged = Game(merge_players(game, i, j), game.config)
    lhs = float(exact_payoffs_all(merged, scheme)[min(i, j)])
    payoffs = exact_payoffs_all(game, scheme)
    rhs = float(payoffs[i] + payoffs[j])
    return AxiomCheck(abs(lhs - rhs) <= game.config.tolerance, lhs, rhs)
