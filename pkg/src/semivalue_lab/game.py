"""Coalitions, characteristic-function games and structural assumption checks."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .config import MAX_PACKED_PLAYERS, LabConfig
from .errors import CapacityError, InvalidCoalitionError, PreconditionError
from .models import (
    AssumptionReport,
    AssumptionWitness,
    CoverageValuation,
    FacilityValuation,
    GameSpec,
    ReplicatedValuation,
    SyntheticValuation,
    TableValuation,
)
from .synthetic import build_synthetic_table, coalition_sizes

logger = logging.getLogger(__name__)


# ── Coalitions ──────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Coalition:
    """A set of players packed into a bit pattern; bit ``i`` set means player ``i``."""

    mask: int
    n: int

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_PACKED_PLAYERS:
            raise PreconditionError(
                f"Coalitions support 1 to {MAX_PACKED_PLAYERS} players, got {self.n}"
            )
        if self.mask < 0 or self.mask >> self.n:
            raise InvalidCoalitionError(self.mask.bit_length() - 1, self.n)

    @classmethod
    def of(cls, members: Iterable[int], n: int) -> Coalition:
        mask = 0
        for i in members:
            if not 0 <= i < n:
                raise InvalidCoalitionError(i, n)
            if mask >> i & 1:
                raise PreconditionError(f"Player {i} listed twice")
            mask |= 1 << i
        return cls(mask, n)

    @classmethod
    def empty(cls, n: int) -> Coalition:
        return cls(0, n)

    @classmethod
    def grand(cls, n: int) -> Coalition:
        return cls((1 << n) - 1, n)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.mask >> i & 1)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __contains__(self, player: int) -> bool:
        return 0 <= player < self.n and bool(self.mask >> player & 1)

    def with_player(self, player: int) -> Coalition:
        if not 0 <= player < self.n:
            raise InvalidCoalitionError(player, self.n)
        return Coalition(self.mask | 1 << player, self.n)

    def __repr__(self) -> str:
        return f"Coalition({set(self.members) or '{}'}, n={self.n})"


def members_of(mask: int, n: int) -> list[int]:
    return [i for i in range(n) if mask >> i & 1]


# ── Games ───────────────────────────────────────────────────────────────────


class Game:
    """A ``GameSpec`` plus its lazily built value table.

    The table holds ``v(S)`` for every bit pattern and is the only cache; it is
    built at most once, under a lock, and never mutated afterwards.
    """

    def __init__(self, spec: GameSpec, config: Optional[LabConfig] = None) -> None:
        self.spec = spec
        self.config = config or LabConfig.from_env()
        self._table: Optional[np.ndarray] = None
        self._lock = threading.Lock()
        self._base: Optional[Game] = None
        if isinstance(spec.valuation, ReplicatedValuation):
            self._base = Game(spec.valuation.base, self.config)

    @classmethod
    def from_file(cls, path: Path, config: Optional[LabConfig] = None) -> Game:
        return cls(GameSpec.from_file(path), config)

    @property
    def n_players(self) -> int:
        return self.spec.n_players

    def __repr__(self) -> str:
        return f"Game(n_players={self.n_players}, valuation={self.spec.valuation.type!r})"

    # ── Value table ─────────────────────────────────────────────────────────

    def require_enumerable(self) -> None:
        if self.n_players > self.config.enumeration_cap:
            raise CapacityError(self.n_players, self.config.enumeration_cap)

    def value_table(self) -> np.ndarray:
        """Return ``v`` for all ``2**n`` coalitions, indexed by bit pattern."""
        self.require_enumerable()
        if self._table is None:
            with self._lock:
                if self._table is None:
                    logger.debug(
                        "Building %s value table over 2^%d coalitions",
                        self.spec.valuation.type,
                        self.n_players,
                    )
                    table = self._build_table()
                    table.setflags(write=False)
                    self._table = table
        return self._table

    def _build_table(self) -> np.ndarray:
        n = self.n_players
        val = self.spec.valuation
        if isinstance(val, TableValuation):
            return np.asarray(val.values, dtype=np.float64).copy()
        if isinstance(val, FacilityValuation):
            utilities = np.asarray(val.utilities, dtype=np.float64)
            table = np.zeros(2**n, dtype=np.float64)
            for column in utilities.T:
                best = np.zeros(1, dtype=np.float64)
                for u in column:
                    best = np.concatenate([best, np.maximum(best, u)])
                table += best
            return table
        if isinstance(val, CoverageValuation):
            masks = np.arange(2**n, dtype=np.int64)
            table = np.zeros(2**n, dtype=np.float64)
            for element, weight in enumerate(val.weights):
                owners = sum(1 << i for i, covered in enumerate(val.covers) if element in covered)
                if owners and weight:
                    table += weight * ((masks & owners) != 0)
            return table
        if isinstance(val, SyntheticValuation):
            return build_synthetic_table(n, val)
        return self._replicated_table(val)

    def _replicated_table(self, val: ReplicatedValuation) -> np.ndarray:
        base_n = val.base.n_players
        base_table = self._base.value_table()
        masks = np.arange(2**self.n_players, dtype=np.int64)
        honest = masks & ((1 << base_n) - 1)
        extra = masks >> base_n
        base_masks = np.where(extra != 0, honest | (1 << val.malicious), honest)
        return base_table[base_masks]

    # ── Evaluation ──────────────────────────────────────────────────────────

    def _check(self, s: Coalition) -> None:
        if s.n != self.n_players:
            raise InvalidCoalitionError(s.mask.bit_length() - 1, self.n_players)

    def evaluate(self, s: Coalition) -> float:
        """Return ``v(s)``."""
        self._check(s)
        if self.n_players <= self.config.enumeration_cap:
            return float(self.value_table()[s.mask])
        return self._evaluate_direct(s.mask)

    def _evaluate_direct(self, mask: int) -> float:
        val = self.spec.valuation
        members = members_of(mask, self.n_players)
        if isinstance(val, FacilityValuation):
            if not members:
                return 0.0
            utilities = np.asarray(val.utilities, dtype=np.float64)
            return float(utilities[members].max(axis=0).sum())
        if isinstance(val, CoverageValuation):
            covered = set().union(*(val.covers[i] for i in members)) if members else set()
            return float(sum(val.weights[e] for e in sorted(covered)))
        if isinstance(val, TableValuation):
            return float(val.values[mask])
        if isinstance(val, ReplicatedValuation):
            base_n = val.base.n_players
            base_mask = mask & ((1 << base_n) - 1)
            if mask >> base_n:
                base_mask |= 1 << val.malicious
            return self._base.evaluate(Coalition(base_mask, base_n))
        raise CapacityError(self.n_players, self.config.enumeration_cap)

    def marginal_contribution(self, i: int, s: Coalition) -> float:
        """Return ``v(s ∪ {i}) − v(s)``."""
        self._check(s)
        if not 0 <= i < self.n_players:
            raise InvalidCoalitionError(i, self.n_players)
        if i in s:
            raise PreconditionError(f"Player {i} is already in {s!r}")
        return self.evaluate(s.with_player(i)) - self.evaluate(s)


def as_game(game: Game | GameSpec, config: Optional[LabConfig] = None) -> Game:
    return game if isinstance(game, Game) else Game(game, config)


# ── Marginal profiles ───────────────────────────────────────────────────────


@dataclass(frozen=True)
class MarginalProfile:
    """``z[c]``: player's average marginal contribution to size-``c`` coalitions."""

    player: int
    z: np.ndarray

    def is_non_increasing(self, tolerance: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.z) <= tolerance))


def split_on_player(table: np.ndarray, n: int, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Values without and with player ``i``, both in ascending order of the masks without ``i``."""
    view = table.reshape(2 ** (n - 1 - i), 2, 2**i)
    return view[:, 0, :].ravel(), view[:, 1, :].ravel()


def average_marginal_profile(game: Game | GameSpec, i: int) -> MarginalProfile:
    """Average marginal contribution of player ``i`` to each coalition size.

    Contributions are summed in ascending bit-pattern order.
    """
    game = as_game(game)
    n = game.n_players
    if not 0 <= i < n:
        raise InvalidCoalitionError(i, n)
    table = game.value_table()
    without, with_i = split_on_player(table, n, i)
    sizes, _ = split_on_player(coalition_sizes(n), n, i)
    totals = np.bincount(sizes, weights=with_i - without, minlength=n)
    counts = np.bincount(sizes, minlength=n)
    return MarginalProfile(player=i, z=totals / counts)


def average_marginal_profiles(game: Game | GameSpec) -> np.ndarray:
    """Stack of every player's profile, shape ``(n, n)``, sharing one value table."""
    game = as_game(game)
    return np.vstack([average_marginal_profile(game, i).z for i in range(game.n_players)])


# ── Assumption checks ───────────────────────────────────────────────────────


def _strict_superset_max(values: np.ndarray, n: int, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Max of ``values`` over strict supersets of each coalition without ``i``.

    Returns ``(best, arg)``; ``arg`` is the lowest bit pattern attaining ``best``.
    Coalitions with no strict superset get ``-inf`` and ``-1``.
    """
    masks = np.arange(2**n, dtype=np.int64)
    bit_i = 1 << i
    best = np.where(masks & bit_i, -np.inf, values)
    arg = masks.copy()
    others = [b for b in range(n) if b != i]

    # superset max including the coalition itself
    for b in others:
        lo = masks[(masks & ((1 << b) | bit_i)) == 0]
        hi = lo | 1 << b
        take = (best[hi] > best[lo]) | ((best[hi] == best[lo]) & (arg[hi] < arg[lo]))
        best[lo[take]] = best[hi[take]]
        arg[lo[take]] = arg[hi[take]]

    strict = np.full(2**n, -np.inf)
    strict_arg = np.full(2**n, -1, dtype=np.int64)
    for b in others:
        lo = masks[(masks & ((1 << b) | bit_i)) == 0]
        hi = lo | 1 << b
        take = (best[hi] > strict[lo]) | ((best[hi] == strict[lo]) & (arg[hi] < strict_arg[lo]))
        strict[lo[take]] = best[hi[take]]
        strict_arg[lo[take]] = arg[hi[take]]
    return strict, strict_arg


def verify_submodularity(game: Game | GameSpec) -> AssumptionReport:
    """Check diminishing marginal contributions over every nested coalition pair.

    For each player ``i`` and coalition ``S`` without ``i`` the largest
    ``MC_i(S')`` over strict supersets ``S'`` (still without ``i``) is found by a
    superset-max pass, so the check costs ``N^2 * 2^N`` rather than ``3^N``.
    The witness is the most violating pair ``S ⊂ S'``; ties go to the lowest
    ``i``, then ``S``, then ``S'`` by bit pattern.
    """
    game = as_game(game)
    n = game.n_players
    table = game.value_table()
    masks = np.arange(2**n, dtype=np.int64)
    tolerance = game.config.tolerance

    worst: Optional[tuple[float, int, int, int]] = None
    for i in range(n):
        bit_i = 1 << i
        mc_i = table[masks | bit_i] - table
        strict, strict_arg = _strict_superset_max(mc_i, n, i)
        candidates = masks[((masks & bit_i) == 0) & (strict_arg >= 0)]
        if candidates.size == 0:
            continue
        slack = mc_i[candidates] - strict[candidates]
        k = int(np.argmin(slack))
        if worst is None or slack[k] < worst[0]:
            s = int(candidates[k])
            worst = (float(slack[k]), i, s, int(strict_arg[s]))

    if worst is None or worst[0] >= -tolerance:
        return AssumptionReport(assumption="submodularity", holds=True)
    slack, i, s, t = worst
    lhs = float(table[s | 1 << i] - table[s])
    rhs = float(table[t | 1 << i] - table[t])
    return AssumptionReport(
        assumption="submodularity",
        holds=False,
        witness=AssumptionWitness(
            player=i,
            coalitions=[members_of(s, n), members_of(t, n)],
            inequality="MC_i(S) >= MC_i(S')",
            lhs=lhs,
            rhs=rhs,
            slack=slack,
        ),
    )


def verify_replication_redundancy(
    game: Game | GameSpec, replicas: Iterable[int]
) -> AssumptionReport:
    """Check that a replica adds nothing to a coalition already holding another replica."""
    game = as_game(game)
    n = game.n_players
    replicas = sorted(set(replicas))
    for r in replicas:
        if not 0 <= r < n:
            raise InvalidCoalitionError(r, n)
    table = game.value_table()
    masks = np.arange(2**n, dtype=np.int64)
    replica_mask = sum(1 << r for r in replicas)

    worst: Optional[tuple[float, int, int]] = None
    for j in replicas:
        bit_j = 1 << j
        others = replica_mask & ~bit_j
        if not others:
            continue
        pool = masks[((masks & bit_j) == 0) & ((masks & others) != 0)]
        mc = table[pool | bit_j] - table[pool]
        k = int(np.argmax(np.abs(mc)))
        if worst is None or abs(mc[k]) > abs(worst[0]):
            worst = (float(mc[k]), j, int(pool[k]))

    if worst is None or abs(worst[0]) <= game.config.tolerance:
        return AssumptionReport(assumption="replication-redundancy", holds=True)
    mc, j, s = worst
    return AssumptionReport(
        assumption="replication-redundancy",
        holds=False,
        witness=AssumptionWitness(
            player=j,
            coalitions=[members_of(s, n)],
            inequality="MC_j(S) == 0",
            lhs=mc,
            rhs=0.0,
            slack=-abs(mc),
        ),
    )
