"""Facility location games and their closed-form Shapley and Banzhaf solvers."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Literal

import numpy as np
import pandas as pd

from .config import Seed
from .errors import PreconditionError
from .models import FacilityGeneratorSpec, FacilityValuation, GameSpec

logger = logging.getLogger(__name__)

MAX_UTILITY = 100.0


@dataclass(frozen=True)
class UtilityMatrix:
    """``utilities[i, d]``: utility customer ``d`` gets from facility ``i``."""

    utilities: np.ndarray

    def __post_init__(self) -> None:
        u = np.asarray(self.utilities, dtype=np.float64)
        if u.ndim != 2 or 0 in u.shape:
            raise PreconditionError(f"utility matrix must be a non-empty 2-D array, got shape {u.shape}")
        if not np.all(np.isfinite(u)) or np.any(u < 0):
            raise PreconditionError("utilities must be finite and non-negative")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, "utilities", u)

    @property
    def n_facilities(self) -> int:
        return self.utilities.shape[0]

    @property
    def n_customers(self) -> int:
        return self.utilities.shape[1]

    @classmethod
    def from_spec(cls, spec: GameSpec) -> UtilityMatrix:
        if not isinstance(spec.valuation, FacilityValuation):
            raise PreconditionError(f"expected a facility game, got {spec.valuation.type!r}")
        return cls(np.asarray(spec.valuation.utilities, dtype=np.float64))

    def to_spec(self) -> GameSpec:
        rows = tuple(tuple(float(u) for u in row) for row in self.utilities)
        return GameSpec(n_players=self.n_facilities, valuation=FacilityValuation(utilities=rows))


@dataclass(frozen=True)
class SortedDimension:
    """Per-customer ordering of the facilities.

    ``order[:, d]`` lists facilities by ascending utility (ties by index),
    ``rank[i, d]`` is facility ``i``'s position there and ``dominated[i, d]``
    counts the facilities with strictly lower utility for customer ``d``.
    """

    order: np.ndarray
    rank: np.ndarray
    dominated: np.ndarray
    sorted_utilities: np.ndarray


def sort_dimensions(m: UtilityMatrix) -> SortedDimension:
    u = m.utilities
    order = np.argsort(u, axis=0, kind="stable")
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.arange(m.n_facilities)[:, None], axis=0)
    sorted_u = np.take_along_axis(u, order, axis=0)
    dominated = np.empty_like(order)
    for d in range(m.n_customers):
        dominated[:, d] = np.searchsorted(sorted_u[:, d], u[:, d], side="left")
    return SortedDimension(order=order, rank=rank, dominated=dominated, sorted_utilities=sorted_u)


def facility_value(m: UtilityMatrix, members: Iterable[int]) -> float:
    """Sum over customers of the best utility among ``members``; 0 when empty."""
    members = sorted(set(members))
    if not members:
        return 0.0
    if members[0] < 0 or members[-1] >= m.n_facilities:
        raise PreconditionError(f"facility index outside [0, {m.n_facilities})")
    return float(m.utilities[members].max(axis=0).sum())


def _lookup(prefix: np.ndarray, dominated: np.ndarray) -> np.ndarray:
    return np.take_along_axis(prefix, dominated, axis=0)


def fast_shapley(m: UtilityMatrix) -> np.ndarray:
    """Shapley value of every facility in ``O(n·d)`` after sorting each customer.

    The dominated set of facility ``i`` for customer ``d`` is strict: the
    facilities ``j != i`` with ``u[j, d] < u[i, d]``. The non-strict form
    ``u[j, d] <= u[i, d]`` that closed forms for this game are often written
    with counts ``i`` itself and divides by zero at a column maximum. Under the
    strict reading, tied facilities cancel each other's marginal contribution
    and the result matches enumeration exactly. ``fast_banzhaf`` uses the same
    sets.
    """
    n = m.n_facilities
    dims = sort_dimensions(m)
    u, su, dom = m.utilities, dims.sorted_utilities, dims.dominated
    # prefix[t, d] = sum_{j=1..t} u_(j) / ((n - j)(n - j + 1))
    j = np.arange(1, n, dtype=np.float64)[:, None]
    terms = su[:-1] / ((n - j) * (n - j + 1))
    prefix = np.vstack([np.zeros((1, m.n_customers)), np.cumsum(terms, axis=0)])
    share = u / (n - dom) - _lookup(prefix, dom)
    return share.sum(axis=1)


def fast_banzhaf(m: UtilityMatrix) -> np.ndarray:
    """Banzhaf value of every facility; powers of two kept as ``2^(x − (n−1))``."""
    n = m.n_facilities
    dims = sort_dimensions(m)
    u, su, dom = m.utilities, dims.sorted_utilities, dims.dominated
    j = np.arange(1, n, dtype=np.int64)[:, None]
    terms = np.ldexp(su[:-1], j - n)
    prefix = np.vstack([np.zeros((1, m.n_customers)), np.cumsum(terms, axis=0)])
    share = np.ldexp(u, dom - (n - 1)) - _lookup(prefix, dom)
    return share.sum(axis=1)


FAST_SOLVERS = {"shapley": fast_shapley, "banzhaf": fast_banzhaf}


# ── Generators ──────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class FacilityLayout:
    """A Manhattan-map instance with the grid coordinates it was drawn from."""

    matrix: UtilityMatrix
    facilities: np.ndarray
    customers: np.ndarray


def generate_facility_layout(
    n_facilities: int, n_customers: int, size: int = 50, seed: Seed = None
) -> FacilityLayout:
    """Place facilities and customers on a ``size × size`` grid.

    Utility is ``max(0, 100 − Manhattan distance)``.
    """
    if n_facilities < 1 or n_customers < 1 or size < 1:
        raise PreconditionError("facility, customer and grid sizes must be positive")
    rng = np.random.default_rng(seed)
    facilities = rng.integers(0, size, size=(n_facilities, 2))
    customers = rng.integers(0, size, size=(n_customers, 2))
    distance = np.abs(facilities[:, None, :] - customers[None, :, :]).sum(axis=2)
    utilities = np.maximum(0.0, MAX_UTILITY - distance)
    return FacilityLayout(UtilityMatrix(utilities), facilities, customers)


def generate_facility_game(
    n_facilities: int,
    n_customers: int,
    mode: Literal["uniform-int", "manhattan-map"] = "uniform-int",
    low: int = 0,
    high: int = 20,
    size: int = 50,
    seed: Seed = None,
) -> UtilityMatrix:
    """Random facility game, deterministic given ``seed``.

    ``uniform-int`` draws integer utilities from ``[low, high]`` inclusive.
    """
    if mode == "manhattan-map":
        return generate_facility_layout(n_facilities, n_customers, size, seed).matrix
    if mode != "uniform-int":
        raise PreconditionError(f"unknown facility generator mode {mode!r}")
    if n_facilities < 1 or n_customers < 1:
        raise PreconditionError("facility and customer counts must be positive")
    if low < 0 or high < low:
        raise PreconditionError(f"utility range must satisfy 0 <= low <= high, got [{low}, {high}]")
    rng = np.random.default_rng(seed)
    utilities = rng.integers(low, high + 1, size=(n_facilities, n_customers))
    return UtilityMatrix(utilities.astype(np.float64))


def generate_from_spec(spec: FacilityGeneratorSpec, seed: Seed = None) -> UtilityMatrix:
    return generate_facility_game(
        spec.n_facilities,
        spec.n_customers,
        mode=spec.mode,
        low=spec.low,
        high=spec.high,
        size=spec.size,
        seed=spec.seed if spec.seed is not None else seed,
    )


# ── CSV ─────────────────────────────────────────────────────────────────────


def write_utility_csv(m: UtilityMatrix, path: Path) -> None:
    columns = [f"d{j}" for j in range(m.n_customers)]
    pd.DataFrame(m.utilities, columns=columns).to_csv(path, index=False)


def read_utility_csv(path: Path) -> UtilityMatrix:
    frame = pd.read_csv(path)
    expected = [f"d{j}" for j in range(frame.shape[1])]
    if list(frame.columns) != expected:
        raise PreconditionError(
            f"{path}: header must be {','.join(expected)}, got {','.join(map(str, frame.columns))}"
        )
    return UtilityMatrix(frame.to_numpy(dtype=np.float64))


# ── Replication ─────────────────────────────────────────────────────────────


def replicate_facility_rows(m: UtilityMatrix, i: int, k: int) -> UtilityMatrix:
    """Append ``k`` copies of facility ``i``'s row."""
    if not 0 <= i < m.n_facilities:
        raise PreconditionError(f"facility {i} outside [0, {m.n_facilities})")
    if k < 0:
        raise PreconditionError(f"replica count must be >= 0, got {k}")
    copies = np.repeat(m.utilities[i : i + 1], k, axis=0)
    return UtilityMatrix(np.vstack([m.utilities, copies]))


def facility_replica_totals(
    m: UtilityMatrix, i: int, k_max: int, kind: Literal["shapley", "banzhaf"] = "shapley"
) -> np.ndarray:
    """Total payoff of facility ``i`` and its replicas for ``k = 0..k_max``."""
    solver = FAST_SOLVERS[kind]
    n = m.n_facilities
    totals = []
    for k in range(k_max + 1):
        payoffs = solver(replicate_facility_rows(m, i, k))
        totals.append(payoffs[i] + payoffs[n:].sum())
    return np.array(totals)
