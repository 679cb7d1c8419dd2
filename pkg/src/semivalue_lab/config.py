"""Configuration for semivalue-lab numerics."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

MAX_PACKED_PLAYERS = 63

Seed = Optional[Union[int, np.random.SeedSequence]]


@dataclass(frozen=True)
class LabConfig:
    """Enumeration limits and numerical tolerances.

    Reads from environment variables:
        SEMIVALUE_ENUMERATION_CAP:  Largest player count enumerated exactly (default 24)
        SEMIVALUE_TOLERANCE:        Absolute tolerance for assumption checks (default 1e-9)
        SEMIVALUE_PREFIX_TOLERANCE: Tolerance on importance-weight prefix sums (default 1e-12)
    """

    enumeration_cap: int = 24
    tolerance: float = 1e-9
    prefix_tolerance: float = 1e-12

    def __post_init__(self) -> None:
        if not 1 <= self.enumeration_cap <= MAX_PACKED_PLAYERS:
            raise ValueError(
                f"Enumeration cap must be between 1 and {MAX_PACKED_PLAYERS}, "
                f"got {self.enumeration_cap}"
            )
        if self.tolerance <= 0 or self.prefix_tolerance <= 0:
            raise ValueError("Tolerances must be strictly positive")

    @classmethod
    def from_env(cls) -> LabConfig:
        """Create configuration from environment variables."""
        cap = _read_env("SEMIVALUE_ENUMERATION_CAP", int, cls.enumeration_cap)
        tolerance = _read_env("SEMIVALUE_TOLERANCE", float, cls.tolerance)
        prefix_tolerance = _read_env(
            "SEMIVALUE_PREFIX_TOLERANCE", float, cls.prefix_tolerance
        )
        return cls(enumeration_cap=cap, tolerance=tolerance, prefix_tolerance=prefix_tolerance)


def _read_env(name: str, parse: type, default):
    raw = os.environ.get(name, "").strip()
    if not raw:
        return default
    try:
        return parse(raw)
    except ValueError:
        raise ValueError(
            f"{name} must be a valid {parse.__name__}, got {raw!r}. "
            f"Unset it to use the default ({default})."
        ) from None
