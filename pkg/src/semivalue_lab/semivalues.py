"""Weight schemes and exact semivalue payoffs via importance weights."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.special import gammaln
from scipy.stats import binom

from .config import LabConfig
from .errors import PreconditionError, SchemeError
from .game import (
    Game,
    as_game,
    average_marginal_profile,
    average_marginal_profiles,
    split_on_player,
)
from .models import GameSpec
from .synthetic import coalition_sizes

logger = logging.getLogger(__name__)

EXACT_FACTORIAL_LIMIT = 170
NORMALIZATION_TOLERANCE = 1e-9


class SchemeKind(str, Enum):
    SHAPLEY = "shapley"
    BANZHAF = "banzhaf"
    LOO = "loo"
    ROBUST_SHAPLEY = "robust-shapley"
    CUSTOM = "custom"


@dataclass(frozen=True)
class WeightScheme:
    """A semivalue, identified by how it weighs coalitions of each size.

    ``alpha`` is only set for ``custom`` schemes: importance weights over
    absolute coalition sizes, zero beyond its length.
    """

    kind: SchemeKind
    alpha: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind is not SchemeKind.CUSTOM:
            if self.alpha:
                raise SchemeError(f"{self.kind.value} derives its weights; alpha is only for custom")
            return
        if not self.alpha:
            raise SchemeError("custom scheme needs at least one importance weight")
        if any(not math.isfinite(a) or a < 0 for a in self.alpha):
            raise SchemeError(f"custom importance weights must be finite and >= 0, got {self.alpha}")
        total = math.fsum(self.alpha)
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise SchemeError(f"custom importance weights must sum to 1, got {total!r}")

    @classmethod
    def parse(cls, text: str) -> WeightScheme:
        """Parse ``shapley``, ``banzhaf``, ``loo``, ``robust-shapley`` or ``custom:a,b,...``."""
        name, _, rest = text.strip().partition(":")
        try:
            kind = SchemeKind(name.strip().lower())
        except ValueError:
            choices = ", ".join(k.value for k in SchemeKind)
            raise SchemeError(f"Unknown scheme {text!r}; expected one of {choices}") from None
        if kind is not SchemeKind.CUSTOM:
            if rest:
                raise SchemeError(f"{kind.value} takes no parameters, got {text!r}")
            return cls(kind)
        try:
            alpha = tuple(float(a) for a in rest.split(",") if a.strip())
        except ValueError:
            raise SchemeError(f"custom weights must be comma-separated numbers, got {rest!r}") from None
        return cls(kind, alpha)

    def __str__(self) -> str:
        if self.kind is SchemeKind.CUSTOM:
            return "custom:" + ",".join(f"{a:g}" for a in self.alpha)
        return self.kind.value


SHAPLEY = WeightScheme(SchemeKind.SHAPLEY)
BANZHAF = WeightScheme(SchemeKind.BANZHAF)
LOO = WeightScheme(SchemeKind.LOO)
ROBUST_SHAPLEY = WeightScheme(SchemeKind.ROBUST_SHAPLEY)


@dataclass(frozen=True)
class ImportanceWeights:
    """``alpha[c] = C(n−1, c)·w(c, n)``: total weight put on size-``c`` coalitions."""

    n_players: int
    alpha: np.ndarray

    def total(self) -> float:
        return math.fsum(self.alpha)


def _check_size(c: int, n: int) -> None:
    if n < 1:
        raise PreconditionError(f"player count must be >= 1, got {n}")
    if not 0 <= c <= n - 1:
        raise PreconditionError(f"coalition size {c} outside [0, {n - 1}]")


def _shapley_weight(c: int, n: int) -> float:
    if n <= EXACT_FACTORIAL_LIMIT:
        return 1 / (n * math.comb(n - 1, c))
    return float(np.exp(gammaln(c + 1) + gammaln(n - c) - gammaln(n + 1)))


def _custom_alpha(scheme: WeightScheme, n: int) -> np.ndarray:
    if n < len(scheme.alpha):
        raise SchemeError(
            f"{scheme} has {len(scheme.alpha)} weights but the game has only {n} coalition sizes"
        )
    alpha = np.zeros(n, dtype=np.float64)
    alpha[: len(scheme.alpha)] = scheme.alpha
    return alpha


def robust_shapley_gamma(n: int, c: int) -> float:
    """Down-weighting factor applied to size-``c`` Shapley weights; always in (0, 1]."""
    _check_size(c, n)
    half = (n - 1) // 2
    if c >= half:
        return 1.0
    return math.comb(n - 1, c) / math.comb(n - 1, half)


def robust_shapley_gammas(n: int) -> np.ndarray:
    return np.array([robust_shapley_gamma(n, c) for c in range(n)], dtype=np.float64)


def coalition_weight(scheme: WeightScheme, c: int, n: int) -> float:
    """Weight ``w(c, n)`` given to each size-``c`` coalition of the other players."""
    _check_size(c, n)
    kind = scheme.kind
    if kind is SchemeKind.SHAPLEY:
        return _shapley_weight(c, n)
    if kind is SchemeKind.BANZHAF:
        return math.ldexp(1.0, 1 - n)
    if kind is SchemeKind.LOO:
        return 1.0 if c == n - 1 else 0.0
    if kind is SchemeKind.ROBUST_SHAPLEY:
        return robust_shapley_gamma(n, c) * _shapley_weight(c, n)
    alpha = _custom_alpha(scheme, n)
    return float(alpha[c]) / math.comb(n - 1, c)


def importance_weights(scheme: WeightScheme, n: int) -> ImportanceWeights:
    """Closed-form importance weights for ``n`` players."""
    if n < 1:
        raise PreconditionError(f"player count must be >= 1, got {n}")
    kind = scheme.kind
    if kind is SchemeKind.SHAPLEY:
        alpha = np.full(n, 1.0 / n)
    elif kind is SchemeKind.BANZHAF:
        alpha = binom.pmf(np.arange(n), n - 1, 0.5)
    elif kind is SchemeKind.LOO:
        alpha = np.zeros(n)
        alpha[n - 1] = 1.0
    elif kind is SchemeKind.ROBUST_SHAPLEY:
        alpha = robust_shapley_gammas(n) / n
    else:
        alpha = _custom_alpha(scheme, n)
    return ImportanceWeights(n_players=n, alpha=np.asarray(alpha, dtype=np.float64))


# ── Exact payoffs ───────────────────────────────────────────────────────────


def exact_payoff(
    game: Game | GameSpec,
    scheme: WeightScheme,
    i: int,
    config: Optional[LabConfig] = None,
) -> float:
    """``φ_i = Σ_c α_c·z_i(c)`` from the player's marginal profile."""
    game = as_game(game, config)
    z = average_marginal_profile(game, i).z
    alpha = importance_weights(scheme, game.n_players).alpha
    return float(np.dot(alpha, z))


def exact_payoffs_all(
    game: Game | GameSpec,
    scheme: WeightScheme,
    config: Optional[LabConfig] = None,
) -> np.ndarray:
    """Exact payoffs of every player, sharing one value table."""
    game = as_game(game, config)
    logger.debug("Exact %s payoffs over %d players", scheme, game.n_players)
    profiles = average_marginal_profiles(game)
    alpha = importance_weights(scheme, game.n_players).alpha
    return profiles @ alpha


def direct_payoff(
    game: Game | GameSpec,
    scheme: WeightScheme,
    i: int,
    config: Optional[LabConfig] = None,
) -> float:
    """``φ_i = Σ_S w(|S|, n)·MC_i(S)`` summed coalition by coalition."""
    game = as_game(game, config)
    n = game.n_players
    table = game.value_table()
    without, with_i = split_on_player(table, n, i)
    sizes, _ = split_on_player(coalition_sizes(n), n, i)
    weights = np.array([coalition_weight(scheme, c, n) for c in range(n)])
    return float(np.sum(weights[sizes] * (with_i - without)))
