"""Seeded synthetic games: random set functions, concave-of-modular, coverage."""

from __future__ import annotations

import logging

import numpy as np

from .errors import PreconditionError
from .models import CoverageValuation, GameSpec, SyntheticValuation

logger = logging.getLogger(__name__)


def subset_sums(weights: np.ndarray) -> np.ndarray:
    """Return ``t[mask] = sum(weights[i] for i in mask)`` for every bit pattern."""
    table = np.zeros(1, dtype=np.float64)
    for w in weights:
        table = np.concatenate([table, table + w])
    return table


def coalition_sizes(n: int) -> np.ndarray:
    """Popcount of every bit pattern below ``2**n``."""
    sizes = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        sizes = np.concatenate([sizes, sizes + 1])
    return sizes


def build_synthetic_table(n: int, valuation: SyntheticValuation) -> np.ndarray:
    """Materialize a synthetic valuation into an explicit value table."""
    rng = np.random.default_rng(valuation.seed)
    logger.debug("Generating %s table for %d players", valuation.generator, n)

    if valuation.generator == "random-set-function":
        # v(S) = (1 - e^-|S|) + N(0.01 * sum of 1-based labels, noise^2)
        sizes = coalition_sizes(n)
        mean = 0.01 * subset_sums(np.arange(1, n + 1, dtype=np.float64))
        table = 1.0 - np.exp(-sizes.astype(np.float64)) + rng.normal(mean, valuation.noise)
    elif valuation.generator == "concave-modular":
        weights = rng.uniform(0.0, 1.0, size=n)
        table = subset_sums(weights) ** valuation.exponent
    else:
        table = rng.uniform(0.0, 1.0, size=2**n)

    table[0] = 0.0
    return table


def synthetic_game(
    n_players: int,
    generator: str = "concave-modular",
    seed: int = 0,
    **params: float,
) -> GameSpec:
    """Build a ``GameSpec`` with a synthetic valuation."""
    return GameSpec(
        n_players=n_players,
        valuation=SyntheticValuation(generator=generator, seed=seed, **params),
    )


def generate_coverage_game(
    n_players: int,
    universe: int,
    density: float = 0.3,
    seed: int = 0,
) -> GameSpec:
    """Random weighted coverage game.

    Element weights are Uniform(0, 1); each player covers each element
    independently with probability ``density``.
    """
    if not 0.0 < density <= 1.0:
        raise PreconditionError(f"density must be in (0, 1], got {density}")
    rng = np.random.default_rng(seed)
    weights = rng.uniform(0.0, 1.0, size=universe)
    hits = rng.random((n_players, universe)) < density
    covers = tuple(tuple(int(e) for e in np.flatnonzero(row)) for row in hits)
    return GameSpec(
        n_players=n_players,
        valuation=CoverageValuation(weights=tuple(float(w) for w in weights), covers=covers),
    )
