"""Replication manipulation: induced games, replicated weights and robustness checks.

Throughout, ``k`` counts the *added* replicas, so the malicious player acts
under ``k + 1`` identities. Replica 0 keeps the original index; the others
are appended after the honest players.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import binom

from .errors import (
    AssumptionViolationError,
    LabError,
    PreconditionError,
    SchemeError,
)
from .game import Game, as_game, average_marginal_profile, members_of, split_on_player
from .models import (
    CoverageValuation,
    FacilityValuation,
    GameSpec,
    ReplicatedValuation,
    RobustnessMode,
    RobustnessVerdict,
    RobustnessViolation,
    WeightPropertyReport,
)
from .semivalues import (
    SHAPLEY,
    SchemeKind,
    WeightScheme,
    exact_payoffs_all,
    importance_weights,
    robust_shapley_gammas,
)
from .synthetic import coalition_sizes

logger = logging.getLogger(__name__)

PREFIX_TOLERANCE = 1e-12
CROSS_CHECK_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ReplicationScenario:
    base: GameSpec
    malicious: int
    k: int

    def __post_init__(self) -> None:
        if not 0 <= self.malicious < self.base.n_players:
            raise PreconditionError(
                f"malicious player {self.malicious} outside game of {self.base.n_players} players"
            )
        if self.k < 0:
            raise PreconditionError(f"replica count must be >= 0, got {self.k}")

    @property
    def n_induced(self) -> int:
        return self.base.n_players + self.k

    @property
    def replicas(self) -> list[int]:
        """Indices of all ``k + 1`` identities in the induced game."""
        return [self.malicious, *range(self.base.n_players, self.n_induced)]


def induce_replication(scenario: ReplicationScenario) -> GameSpec:
    """Game in which the malicious player's replicas are interchangeable and redundant."""
    base, i, k = scenario.base, scenario.malicious, scenario.k
    if k == 0:
        return base
    val = base.valuation
    if isinstance(val, FacilityValuation):
        valuation = FacilityValuation(utilities=val.utilities + (val.utilities[i],) * k)
    elif isinstance(val, CoverageValuation):
        valuation = CoverageValuation(weights=val.weights, covers=val.covers + (val.covers[i],) * k)
    else:
        valuation = ReplicatedValuation(base=base, malicious=i, k=k)
    return GameSpec(n_players=scenario.n_induced, valuation=valuation)


# ── Replicated importance weights ───────────────────────────────────────────


def _binomial_ratio(n: int, k: int) -> np.ndarray:
    """``C(n−1, c) / C(n+k−1, c)`` for ``c = 0..n−1``."""
    j = np.arange(n - 1, dtype=np.float64)
    ratios = (n - 1 - j) / (n + k - 1 - j)
    return np.concatenate([[1.0], np.cumprod(ratios)])


def replicated_importance_weights(scheme: WeightScheme, n: int, k: int) -> np.ndarray:
    """Weights ``α_c^k`` on ``z_i(c)`` in the total payoff of all ``k + 1`` identities."""
    if n < 1:
        raise PreconditionError(f"player count must be >= 1, got {n}")
    if k < 0:
        raise PreconditionError(f"replica count must be >= 0, got {k}")
    if k == 0:
        return importance_weights(scheme, n).alpha

    kind = scheme.kind
    if kind is SchemeKind.BANZHAF:
        return math.ldexp(k + 1, -k) * binom.pmf(np.arange(n), n - 1, 0.5)
    if kind is SchemeKind.LOO:
        return np.zeros(n)
    ratio = _binomial_ratio(n, k)
    if kind is SchemeKind.SHAPLEY:
        return (k + 1) / (n + k) * ratio
    if kind is SchemeKind.ROBUST_SHAPLEY:
        return robust_shapley_gammas(n + k)[:n] * (k + 1) / (n + k) * ratio
    alpha = importance_weights(scheme, n + k).alpha[:n]
    return (k + 1) * alpha * ratio


def payoff_at(z: np.ndarray, scheme: WeightScheme, k: int) -> float:
    return float(np.dot(replicated_importance_weights(scheme, len(z), k), z))


def payoff_curve_from_profile(z: np.ndarray, scheme: WeightScheme, k_max: int) -> np.ndarray:
    """Total payoff over ``k = 0..k_max`` for a given marginal profile."""
    z = np.asarray(z, dtype=np.float64)
    return np.array([payoff_at(z, scheme, k) for k in range(k_max + 1)])


def total_payoff_curve(
    game: Game | GameSpec, scheme: WeightScheme, player: int, k_max: int
) -> np.ndarray:
    if k_max < 0:
        raise PreconditionError(f"k_max must be >= 0, got {k_max}")
    z = average_marginal_profile(as_game(game), player).z
    return payoff_curve_from_profile(z, scheme, k_max)


def delta_single_replication(game: Game | GameSpec, scheme: WeightScheme, i: int) -> float:
    """Change in total payoff when the player adds one replica.

    Shapley is summed coalition by coalition and cross-checked against the
    curve; Banzhaf is exactly neutral.
    """
    game = as_game(game)
    curve = total_payoff_curve(game, scheme, i, 1)
    if scheme.kind is SchemeKind.BANZHAF:
        delta = 0.0
    elif scheme.kind is SchemeKind.SHAPLEY:
        n = game.n_players
        without, with_i = split_on_player(game.value_table(), n, i)
        sizes, _ = split_on_player(coalition_sizes(n), n, i)
        weights = np.array(
            [(n - 2 * c - 1) / (n * (n + 1) * math.comb(n - 1, c)) for c in range(n)]
        )
        delta = float(np.sum(weights[sizes] * (with_i - without)))
    else:
        raise SchemeError(f"no closed form for a single replication under {scheme}")

    drift = abs((curve[1] - curve[0]) - delta)
    if drift > CROSS_CHECK_TOLERANCE * max(1.0, float(np.max(np.abs(curve)))):
        raise LabError(f"single-replication delta {delta} disagrees with the curve by {drift}")
    return float(delta)


# ── Robustness conditions ───────────────────────────────────────────────────

_CONDITIONS = {
    RobustnessMode.IFF_CONDITION: "sum_{c<=p} alpha_c^0 >= sum_{c<=p} alpha_c^k for all k, p",
    RobustnessMode.MONOTONE_DECREASE: "sum_{c<=p} alpha_c^k >= sum_{c<=p} alpha_c^(k+1) for all k, p",
    RobustnessMode.MONOTONE_INCREASE: "sum_{c<=p} alpha_c^(k+1) >= sum_{c<=p} alpha_c^k for all k, p",
}


def prefix_sums(scheme: WeightScheme, n: int, k_max: int) -> np.ndarray:
    """Row ``k`` holds the cumulative sums of ``α^k``."""
    return np.vstack(
        [np.cumsum(replicated_importance_weights(scheme, n, k)) for k in range(k_max + 1)]
    )


def check_robustness(
    scheme: WeightScheme,
    n: int,
    k_max: int,
    mode: RobustnessMode = RobustnessMode.IFF_CONDITION,
    tolerance: float = PREFIX_TOLERANCE,
) -> RobustnessVerdict:
    """Check a prefix-sum dominance condition on replicated weights over ``k ≤ k_max``."""
    if n < 2:
        raise PreconditionError(f"robustness needs at least 2 players, got {n}")
    if k_max < 1:
        raise PreconditionError(f"k_max must be >= 1, got {k_max}")
    mode = RobustnessMode(mode)
    prefixes = prefix_sums(scheme, n, k_max)

    failing: list[RobustnessViolation] = []
    for k in range(1, k_max + 1):
        if mode is RobustnessMode.IFF_CONDITION:
            lhs, rhs = prefixes[0], prefixes[k]
        elif mode is RobustnessMode.MONOTONE_DECREASE:
            lhs, rhs = prefixes[k - 1], prefixes[k]
        else:
            lhs, rhs = prefixes[k], prefixes[k - 1]
        for p in np.flatnonzero(lhs < rhs - tolerance):
            failing.append(
                RobustnessViolation(k=k, p=int(p), lhs=float(lhs[p]), rhs=float(rhs[p]))
            )

    logger.debug("%s %s n=%d k_max=%d: %d violations", scheme, mode.value, n, k_max, len(failing))
    return RobustnessVerdict(
        scheme=str(scheme),
        n=n,
        k_max=k_max,
        mode=mode,
        condition=_CONDITIONS[mode],
        robust=not failing,
        failing=failing,
    )


def shapley_weight_properties(
    n: int, k_max: int, tolerance: float = PREFIX_TOLERANCE
) -> WeightPropertyReport:
    """Unit sum, prefix growth in ``k`` and diminishing prefix increments of Shapley weights."""
    if n < 2:
        raise PreconditionError(f"weight properties need at least 2 players, got {n}")
    prefixes = prefix_sums(SHAPLEY, n, k_max)
    sum_gap = np.abs(prefixes[:, -1] - 1.0)
    steps = np.diff(prefixes, axis=0)
    growth_gap = np.maximum(-steps, 0.0)
    curvature_gap = np.maximum(np.diff(steps, axis=0), 0.0)

    gaps = [sum_gap, growth_gap, curvature_gap]
    worst = max((float(g.max()) for g in gaps if g.size), default=0.0)
    return WeightPropertyReport(
        n=n,
        k_max=k_max,
        sums_to_one=bool(np.all(sum_gap <= tolerance)),
        prefix_monotone=bool(np.all(growth_gap <= tolerance)),
        increments_diminishing=bool(np.all(curvature_gap <= tolerance)),
        max_abs_violation=worst,
    )


def adversarial_profile(scheme: WeightScheme, n: int, k: int) -> Optional[np.ndarray]:
    """A non-increasing profile whose total payoff grows under ``k`` replicas.

    Built at the first prefix ``p`` where replication gains weight: ``z = 1``
    below ``p``, ``z[p] = γ + ε``, zero above. ``None`` when no prefix gains.
    """
    gap = np.cumsum(importance_weights(scheme, n).alpha - replicated_importance_weights(scheme, n, k))
    violating = np.flatnonzero(gap < -PREFIX_TOLERANCE)
    if not violating.size:
        return None
    p = int(violating[0])
    z = np.zeros(n)
    if p == 0:
        z[0] = 1.0
        return z
    step = gap[p] - gap[p - 1]
    gamma = gap[p - 1] / abs(step)
    epsilon = (1.0 - gamma) / 2
    z[:p] = 1.0
    z[p] = gamma + epsilon
    return z


# ── Limits and bounds ───────────────────────────────────────────────────────

LIMIT_HORIZONS = {
    SchemeKind.BANZHAF: 60,
    SchemeKind.LOO: 1,
    SchemeKind.ROBUST_SHAPLEY: 60,
}
SHAPLEY_MIN_HORIZON = 500


def limit_total_payoff(game: Game | GameSpec, scheme: WeightScheme, i: int) -> float:
    """Total payoff as the replica count grows without bound."""
    if scheme.kind is SchemeKind.CUSTOM:
        raise SchemeError(f"no derived limit for {scheme}")
    if scheme.kind is SchemeKind.SHAPLEY:
        return float(average_marginal_profile(as_game(game), i).z[0])
    return 0.0


def limit_cross_check(
    game: Game | GameSpec, scheme: WeightScheme, i: int, tolerance: float = 1e-3
) -> tuple[float, int, float]:
    """Return ``(limit, k, curve[k])`` at a horizon where the curve is within ``tolerance``.

    The Shapley curve trails its limit by at most ``(N−1)/(N+k)·(z(0) − min z)``,
    so its horizon grows with the spread of the profile.
    """
    game = as_game(game)
    limit = limit_total_payoff(game, scheme, i)
    z = average_marginal_profile(game, i).z
    if scheme.kind is SchemeKind.SHAPLEY:
        spread = float(z[0] - z.min())
        horizon = max(
            SHAPLEY_MIN_HORIZON, math.ceil((game.n_players - 1) * spread / tolerance)
        )
    else:
        horizon = LIMIT_HORIZONS[scheme.kind]
    return limit, horizon, payoff_at(z, scheme, horizon)


def robust_shapley_loss_bound(game: Game | GameSpec, i: int, k: int) -> tuple[float, float]:
    """``(actual, bound)`` on the Robust Shapley total-payoff loss under ``k`` replicas."""
    if k < 0:
        raise PreconditionError(f"replica count must be >= 0, got {k}")
    game = as_game(game)
    n = game.n_players
    z = average_marginal_profile(game, i).z
    robust = WeightScheme(SchemeKind.ROBUST_SHAPLEY)
    actual = payoff_at(z, robust, 0) - payoff_at(z, robust, k)
    factor = 1.0 - math.ldexp(k + 1, -k)
    bound = float(np.sum(factor * robust_shapley_gammas(n) * z) / n)
    return actual, bound


def _replica_payoff_total(game: Game, replicas: list[int], scheme: WeightScheme) -> float:
    return float(np.sum(exact_payoffs_all(game, scheme)[replicas]))


def perturbation_gain_bound(
    scenario: ReplicationScenario,
    epsilon: float,
    perturbed_game: Game | GameSpec,
    scheme: WeightScheme = SHAPLEY,
) -> tuple[float, float]:
    """Extra total payoff from perturbing replicas, with its ``(k+1)·ε`` bound.

    The perturbed replicas must contribute to honest coalitions exactly as
    the faithful replicas do, and at most ``ε`` to coalitions that already
    hold another replica.
    """
    if epsilon < 0:
        raise PreconditionError(f"epsilon must be >= 0, got {epsilon}")
    perturbed = as_game(perturbed_game)
    if perturbed.n_players != scenario.n_induced:
        raise PreconditionError(
            f"perturbed game has {perturbed.n_players} players, expected {scenario.n_induced}"
        )
    induced = Game(induce_replication(scenario), perturbed.config)
    n = scenario.n_induced
    tolerance = perturbed.config.tolerance
    replicas = scenario.replicas
    replica_mask = sum(1 << r for r in replicas)
    faithful = induced.value_table()
    table = perturbed.value_table()

    masks = np.arange(2**n, dtype=np.int64)
    for r in replicas:
        bit = 1 << r
        free = masks[(masks & bit) == 0]
        mc = table[free | bit] - table[free]
        crowded = (free & replica_mask) != 0

        drift = np.abs(mc - (faithful[free | bit] - faithful[free]))
        bad = np.flatnonzero(~crowded & (drift > tolerance))
        if bad.size:
            raise AssumptionViolationError(
                members_of(int(free[bad[0]]), n),
                f"replica {r} changes its contribution to an honest coalition",
            )
        bad = np.flatnonzero(crowded & (mc > epsilon + tolerance))
        if bad.size:
            s = int(free[bad[0]])
            raise AssumptionViolationError(
                members_of(s, n),
                f"replica {r} adds {mc[bad[0]]} > epsilon={epsilon} next to another replica",
            )

    gain = _replica_payoff_total(perturbed, replicas, scheme) - _replica_payoff_total(
        induced, replicas, scheme
    )
    return gain, (scenario.k + 1) * epsilon
