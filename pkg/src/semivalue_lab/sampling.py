"""Monte-Carlo semivalue estimation from one shared pool of sampled coalitions."""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Union

import numpy as np

from .config import Seed
from .errors import CoverageError, PreconditionError
from .game import Coalition, Game, as_game
from .models import GameSpec
from .semivalues import WeightScheme, importance_weights
from .synthetic import coalition_sizes

logger = logging.getLogger(__name__)

SizeDistribution = Union[Literal["uniform", "exhaustive"], Sequence[float]]


@dataclass(frozen=True)
class SampleBatch:
    """Evaluated coalitions plus the running sums the estimators need.

    ``member_sum[i, c]``/``member_count[i, c]`` accumulate the values of
    size-``c`` coalitions that contain player ``i``.
    """

    n_players: int
    masks: np.ndarray
    sizes: np.ndarray
    values: np.ndarray
    size_sum: np.ndarray
    size_count: np.ndarray
    member_sum: np.ndarray
    member_count: np.ndarray

    @property
    def size_means(self) -> np.ndarray:
        """``U[c]``; NaN where no size-``c`` coalition was drawn."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.size_count > 0, self.size_sum / self.size_count, np.nan)

    @property
    def member_means(self) -> np.ndarray:
        """``Ubar[i, c]``; NaN where player ``i`` was never in a size-``c`` draw."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(
                self.member_count > 0, self.member_sum / self.member_count, np.nan
            )

    def samples(self) -> list[tuple[Coalition, float]]:
        return [
            (Coalition(int(m), self.n_players), float(v))
            for m, v in zip(self.masks, self.values)
        ]


@dataclass(frozen=True)
class EstimateSet:
    phi_hat: np.ndarray
    phi_all: float
    phi_prime: Optional[np.ndarray] = None

    def to_records(self) -> list[dict[str, float]]:
        prime = self.phi_prime if self.phi_prime is not None else [None] * len(self.phi_hat)
        return [
            {"player": i, "phi_hat": float(h), "phi_prime": None if p is None else float(p)}
            for i, (h, p) in enumerate(zip(self.phi_hat, prime))
        ]


# ── Drawing ─────────────────────────────────────────────────────────────────


def allocate_budget(budget: int, weights: np.ndarray) -> np.ndarray:
    """Split ``budget`` draws across sizes in proportion to ``weights``.

    Largest-remainder rounding; ties go to the smaller size.
    """
    weights = np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    if total <= 0 or np.any(weights < 0):
        raise PreconditionError("size distribution needs non-negative weights with a positive sum")
    exact = budget * weights / total
    counts = np.floor(exact).astype(np.int64)
    leftover = budget - int(counts.sum())
    order = np.lexsort((np.arange(len(weights)), -(exact - counts)))
    counts[order[:leftover]] += 1
    return counts


def size_weights(q: SizeDistribution, n: int) -> np.ndarray:
    """Weights over sizes ``0..n``; ``uniform`` spreads over ``1..n−1``."""
    if isinstance(q, str):
        if q != "uniform":
            raise PreconditionError(f"unknown size distribution {q!r}")
        weights = np.zeros(n + 1)
        weights[1:n] = 1.0
        if n == 1:
            weights[1] = 1.0
        return weights
    weights = np.asarray(q, dtype=np.float64)
    if weights.shape != (n + 1,):
        raise PreconditionError(f"size distribution needs {n + 1} weights (sizes 0..{n}), got {len(weights)}")
    return weights


def _draw_masks(n: int, counts: np.ndarray, rng: np.random.Generator) -> tuple[list[int], list[int]]:
    """Members come from cyclic windows over shuffled player orders.

    Every window of a uniform permutation is a uniform ``c``-subset, and
    ``ceil(n / c)`` consecutive windows of one order cover every player.
    """
    masks: list[int] = []
    sizes: list[int] = []
    for c, count in enumerate(counts):
        if count == 0:
            continue
        if c == 0:
            masks.extend([0] * int(count))
            sizes.extend([0] * int(count))
            continue
        windows = math.ceil(n / c)
        order = rng.permutation(n)
        for t in range(int(count)):
            if t % windows == 0 and t:
                order = rng.permutation(n)
            start = (t % windows) * c
            members = order[(start + np.arange(c)) % n]
            masks.append(int(np.bitwise_or.reduce(np.left_shift(1, members.astype(np.int64)))))
            sizes.append(c)
    return masks, sizes


def draw_samples(
    game: Game | GameSpec,
    budget: int,
    q: SizeDistribution = "uniform",
    seed: Seed = 0,
) -> SampleBatch:
    """Draw ``budget`` coalitions (sizes from ``q``) and accumulate per-size and per-player means.

    ``v(∅)`` and ``v(N)`` are always added. ``q="exhaustive"`` evaluates every
    coalition once instead of sampling.
    """
    game = as_game(game)
    n = game.n_players
    if budget < 1:
        raise PreconditionError(f"sampling budget must be >= 1, got {budget}")

    if isinstance(q, str) and q == "exhaustive":
        game.require_enumerable()
        mask_arr = np.arange(2**n, dtype=np.int64)
        size_arr = coalition_sizes(n)
    else:
        counts = allocate_budget(budget, size_weights(q, n))
        rng = np.random.default_rng(seed)
        masks, sizes = _draw_masks(n, counts, rng)
        masks += [0, (1 << n) - 1]
        sizes += [0, n]
        mask_arr = np.array(masks, dtype=np.int64)
        size_arr = np.array(sizes, dtype=np.int64)

    if n <= game.config.enumeration_cap:
        values = game.value_table()[mask_arr]
    else:
        values = np.array([game.evaluate(Coalition(int(m), n)) for m in mask_arr])
    logger.debug("Drew %d coalitions over %d players (seed=%s)", len(mask_arr), n, seed)

    size_sum = np.bincount(size_arr, weights=values, minlength=n + 1)
    size_count = np.bincount(size_arr, minlength=n + 1)
    member_sum = np.zeros((n, n + 1))
    member_count = np.zeros((n, n + 1), dtype=np.int64)
    for i in range(n):
        hit = ((mask_arr >> i) & 1).astype(bool)
        member_sum[i] = np.bincount(size_arr[hit], weights=values[hit], minlength=n + 1)
        member_count[i] = np.bincount(size_arr[hit], minlength=n + 1)

    return SampleBatch(
        n_players=n,
        masks=mask_arr,
        sizes=size_arr,
        values=values,
        size_sum=size_sum,
        size_count=size_count,
        member_sum=member_sum,
        member_count=member_count,
    )


# ── Estimators ──────────────────────────────────────────────────────────────


def _missing_cells(batch: SampleBatch, alpha: np.ndarray) -> list[tuple[int, Optional[int]]]:
    n = batch.n_players
    missing: list[tuple[int, Optional[int]]] = []
    for c in np.flatnonzero(alpha > 0):
        for size in (c, c + 1):
            if batch.size_count[size] == 0 and (size, None) not in missing:
                missing.append((int(size), None))
        for size in (c, c + 1):
            if size == 0:
                continue
            for i in range(n):
                cell = (int(size), i)
                if batch.member_count[i, size] == 0 and cell not in missing:
                    missing.append(cell)
    return missing


def estimate_payoffs(batch: SampleBatch, scheme: WeightScheme) -> EstimateSet:
    """Per-player and total-payoff estimates from shared samples."""
    n = batch.n_players
    alpha = importance_weights(scheme, n).alpha
    missing = _missing_cells(batch, alpha)
    if missing:
        raise CoverageError(missing)

    size_means = batch.size_means
    member_means = batch.member_means
    phi_hat = np.zeros(n)
    phi_all = 0.0
    for c in np.flatnonzero(alpha > 0):
        upper = (n - c) / n * member_means[:, c + 1]
        lower = c / n * member_means[:, c] if c > 0 else 0.0
        phi_hat += alpha[c] * n / (n - c) * (upper + lower - size_means[c])
        phi_all += alpha[c] * (size_means[c + 1] - size_means[c])
    return EstimateSet(phi_hat=phi_hat, phi_all=float(n * phi_all))


def pairwise_differences(phi_hat: np.ndarray) -> np.ndarray:
    return phi_hat[:, None] - phi_hat[None, :]


def reconcile_feasibility(
    estimates: EstimateSet, pairwise: Optional[np.ndarray] = None, tolerance: float = 1e-9
) -> np.ndarray:
    """Payoffs that keep the pairwise gaps and add up to ``phi_all``.

    Closed-form projection: ``φ'_i = (1/N)·Σ_j Δ_ij + φ_all/N``.
    """
    if pairwise is None:
        pairwise = pairwise_differences(estimates.phi_hat)
    pairwise = np.asarray(pairwise, dtype=np.float64)
    n = len(estimates.phi_hat)
    if pairwise.shape != (n, n):
        raise PreconditionError(f"pairwise differences must be {n}x{n}, got {pairwise.shape}")
    if np.max(np.abs(pairwise + pairwise.T)) > tolerance:
        raise PreconditionError("pairwise differences must be antisymmetric")
    return pairwise.sum(axis=1) / n + estimates.phi_all / n


def approximate_semivalue(
    game: Game | GameSpec,
    scheme: WeightScheme,
    budget: int,
    q: SizeDistribution = "uniform",
    seed: Seed = 0,
) -> EstimateSet:
    """Sample, estimate and reconcile; deterministic given ``seed``."""
    batch = draw_samples(game, budget, q, seed)
    estimates = estimate_payoffs(batch, scheme)
    return dataclasses.replace(estimates, phi_prime=reconcile_feasibility(estimates))
