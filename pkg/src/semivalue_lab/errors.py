"""Exception hierarchy for semivalue-lab."""

from __future__ import annotations

from typing import Optional, Sequence


class LabError(Exception):
    """Base class for every error raised by the library."""


class InvalidCoalitionError(LabError):
    """Raised when a coalition references a player outside the game."""

    def __init__(self, player: int, n_players: int):
        self.player = player
        self.n_players = n_players
        super().__init__(f"Player {player} is not in a game of {n_players} players")


class PreconditionError(LabError):
    """Raised when an operation is called outside its domain."""


class CapacityError(LabError):
    """Raised when exact enumeration would exceed the configured player cap."""

    def __init__(self, n_players: int, cap: int):
        self.n_players = n_players
        self.cap = cap
        super().__init__(
            f"Exact enumeration over {n_players} players exceeds the cap of {cap}. "
            f"Raise SEMIVALUE_ENUMERATION_CAP (max 63) or use a closed-form solver."
        )


class SchemeError(LabError):
    """Raised for malformed weight schemes or schemes without a closed form."""


class AssumptionViolationError(LabError):
    """Raised when a game breaks an assumption an operation depends on."""

    def __init__(self, coalition: Sequence[int], message: str):
        self.coalition = list(coalition)
        super().__init__(f"{message} (coalition {self.coalition})")


class CoverageError(LabError):
    """Raised when a sample batch lacks a mean an estimator needs.

    ``missing`` lists ``(size, player)`` cells; ``player`` is ``None`` for a
    missing per-size mean.
    """

    def __init__(self, missing: Sequence[tuple[int, Optional[int]]]):
        self.missing = list(missing)
        shown = ", ".join(
            f"U[{c}]" if p is None else f"Ubar[{p}][{c}]" for c, p in self.missing[:8]
        )
        more = f" and {len(self.missing) - 8} more" if len(self.missing) > 8 else ""
        super().__init__(
            f"Sample batch does not cover {len(self.missing)} required mean(s): "
            f"{shown}{more}. Increase the budget or spread q over more sizes."
        )
