"""Pydantic models for game files, experiment configs and verification reports."""

from __future__ import annotations

import math
from enum import Enum
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeInt,
    PositiveInt,
    model_validator,
)

# ── Game files ──────────────────────────────────────────────────────────────


class TableValuation(BaseModel):
    """Explicit characteristic function, values listed in bit-pattern order."""

    model_config = ConfigDict(frozen=True)

    type: Literal["table"] = "table"
    values: tuple[float, ...]


class FacilityValuation(BaseModel):
    """Facility location function; rows are facilities, columns are customers."""

    model_config = ConfigDict(frozen=True)

    type: Literal["facility"] = "facility"
    utilities: tuple[tuple[float, ...], ...]


class CoverageValuation(BaseModel):
    """Weighted coverage: v(S) is the total weight of elements covered by S."""

    model_config = ConfigDict(frozen=True)

    type: Literal["coverage"] = "coverage"
    weights: tuple[float, ...]
    covers: tuple[tuple[int, ...], ...]


class SyntheticValuation(BaseModel):
    """Seeded generator, materialized into an explicit table on first use."""

    model_config = ConfigDict(frozen=True)

    type: Literal["synthetic"] = "synthetic"
    generator: Literal["random-set-function", "concave-modular", "uniform-table"]
    seed: int = 0
    exponent: float = Field(0.5, gt=0.0, le=1.0)  # concave-modular only
    noise: float = Field(0.05, ge=0.0)  # random-set-function only


class ReplicatedValuation(BaseModel):
    """Game induced by a player acting under k extra identities."""

    model_config = ConfigDict(frozen=True)

    type: Literal["replicated"] = "replicated"
    base: GameSpec
    malicious: NonNegativeInt
    k: NonNegativeInt


Valuation = Annotated[
    Union[
        TableValuation,
        FacilityValuation,
        CoverageValuation,
        SyntheticValuation,
        ReplicatedValuation,
    ],
    Field(discriminator="type"),
]


class GameSpec(BaseModel):
    """A characteristic-function game on ``n_players`` players (0-based)."""

    model_config = ConfigDict(frozen=True)

    n_players: PositiveInt
    valuation: Valuation

    @model_validator(mode="after")
    def _check_shape(self) -> GameSpec:
        n = self.n_players
        val = self.valuation
        if isinstance(val, TableValuation):
            if len(val.values) != 2**n:
                raise ValueError(
                    f"table valuation needs exactly 2^{n} = {2**n} values, got {len(val.values)}"
                )
            if not math.isfinite(val.values[0]):
                raise ValueError("value of the empty coalition must be finite")
        elif isinstance(val, FacilityValuation):
            if len(val.utilities) != n:
                raise ValueError(f"facility valuation needs {n} rows, got {len(val.utilities)}")
            widths = {len(row) for row in val.utilities}
            if len(widths) != 1:
                raise ValueError("facility utility rows must all have the same length")
            for row in val.utilities:
                if any(not math.isfinite(u) or u < 0 for u in row):
                    raise ValueError("facility utilities must be finite and non-negative")
        elif isinstance(val, CoverageValuation):
            if len(val.covers) != n:
                raise ValueError(f"coverage valuation needs {n} covered sets, got {len(val.covers)}")
            if any(not math.isfinite(w) or w < 0 for w in val.weights):
                raise ValueError("coverage weights must be finite and non-negative")
            universe = len(val.weights)
            for covered in val.covers:
                if any(not 0 <= e < universe for e in covered):
                    raise ValueError(f"covered element outside universe of size {universe}")
        elif isinstance(val, ReplicatedValuation):
            if val.malicious >= val.base.n_players:
                raise ValueError(
                    f"malicious player {val.malicious} outside base game "
                    f"of {val.base.n_players} players"
                )
            if n != val.base.n_players + val.k:
                raise ValueError(
                    f"replicated game must have {val.base.n_players + val.k} players, got {n}"
                )
        return self

    @classmethod
    def from_file(cls, path: Path) -> GameSpec:
        """Load a game from its JSON file."""
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


ReplicatedValuation.model_rebuild()


# ── Verification reports ────────────────────────────────────────────────────


class AssumptionWitness(BaseModel):
    """A violated inequality, with enough detail to re-evaluate it."""

    player: int
    coalitions: list[list[int]]
    inequality: str
    lhs: float
    rhs: float
    slack: float


class AssumptionReport(BaseModel):
    assumption: str
    holds: bool
    witness: Optional[AssumptionWitness] = None

    @model_validator(mode="after")
    def _witness_iff_failed(self) -> AssumptionReport:
        if self.holds == (self.witness is not None):
            raise ValueError("witness must be present exactly when the assumption fails")
        return self


class RobustnessMode(str, Enum):
    IFF_CONDITION = "iff-condition"
    MONOTONE_DECREASE = "monotone-decrease"
    MONOTONE_INCREASE = "monotone-increase"


class RobustnessViolation(BaseModel):
    k: int
    p: int
    lhs: float
    rhs: float


class RobustnessVerdict(BaseModel):
    """Outcome of checking one prefix-sum condition over a (k, p) grid.

    ``robust`` is true iff the selected mode's inequality held everywhere; for
    ``monotone-increase`` that certifies a growing total payoff.
    """

    model_config = ConfigDict(populate_by_name=True)

    scheme: str
    n: int
    k_max: int
    mode: RobustnessMode
    condition: str
    robust: bool
    failing: list[RobustnessViolation] = Field(default_factory=list, alias="violations")

    @model_validator(mode="after")
    def _robust_iff_clean(self) -> RobustnessVerdict:
        if self.robust == bool(self.failing):
            raise ValueError("robust must be false exactly when violations are recorded")
        return self


class WeightPropertyReport(BaseModel):
    n: int
    k_max: int
    sums_to_one: bool
    prefix_monotone: bool
    increments_diminishing: bool
    max_abs_violation: float


# ── Experiment configuration ────────────────────────────────────────────────

OutputFormat = Literal["csv", "json"]


class FacilityGeneratorSpec(BaseModel):
    """Random facility game: uniform integer utilities or a Manhattan map."""

    n_facilities: PositiveInt = 10
    n_customers: PositiveInt = 10
    mode: Literal["uniform-int", "manhattan-map"] = "uniform-int"
    low: int = 0
    high: int = 20
    size: PositiveInt = 50
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _check_range(self) -> FacilityGeneratorSpec:
        if self.low < 0 or self.high < self.low:
            raise ValueError(f"utility range must satisfy 0 <= low <= high, got [{self.low}, {self.high}]")
        return self


class SamplerConfig(BaseModel):
    budget: PositiveInt = 256
    q: Union[Literal["uniform", "exhaustive"], list[Annotated[float, Field(ge=0.0)]]] = "uniform"
    seed: int = 0


class ExperimentConfig(BaseModel):
    """Fields shared by every command; the seed is echoed into every output."""

    seed: int = 0
    out: Optional[Path] = None
    format: OutputFormat = "csv"


class GameSourceConfig(ExperimentConfig):
    game: Optional[Path] = None
    generator: Optional[FacilityGeneratorSpec] = None

    @model_validator(mode="after")
    def _one_source(self) -> GameSourceConfig:
        if self.game is not None and self.generator is not None:
            raise ValueError("give either a game file or a generator, not both")
        return self


class SweepConfig(GameSourceConfig):
    malicious: NonNegativeInt = 0
    schemes: list[str] = Field(default_factory=lambda: ["shapley", "banzhaf"])
    k_max: NonNegativeInt = 50


class RobustnessConfig(ExperimentConfig):
    format: OutputFormat = "json"
    n: int = Field(20, ge=2)
    k_max: PositiveInt = 50
    schemes: list[str] = Field(
        default_factory=lambda: ["shapley", "banzhaf", "loo", "robust-shapley"]
    )
    modes: list[RobustnessMode] = Field(default_factory=lambda: list(RobustnessMode))
    summary: bool = False


class FacilityBenchConfig(ExperimentConfig):
    sizes: list[PositiveInt] = Field(default_factory=lambda: [10, 12, 15, 20, 50, 100])
    n_customers: PositiveInt = 10
    low: int = 0
    high: int = 20
    naive_limit: PositiveInt = 20


class SampleEvalConfig(GameSourceConfig):
    scheme: str = "shapley"
    budget: PositiveInt = 256
    q: Union[Literal["uniform", "exhaustive"], list[Annotated[float, Field(ge=0.0)]]] = "uniform"
    runs: PositiveInt = 10


class VerifyConfig(GameSourceConfig):
    replicas: list[NonNegativeInt] = Field(default_factory=list)
