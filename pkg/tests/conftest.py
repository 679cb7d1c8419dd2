"""Pytest fixtures for semivalue-lab tests."""

from __future__ import annotations

import numpy as np
import pytest
from click.testing import CliRunner

from semivalue_lab.config import LabConfig
from semivalue_lab.game import Game
from semivalue_lab.models import (
    CoverageValuation,
    FacilityValuation,
    GameSpec,
    TableValuation,
)


def table_spec(values) -> GameSpec:
    n = int(np.log2(len(values)))
    return GameSpec(n_players=n, valuation=TableValuation(values=tuple(float(v) for v in values)))


def facility_spec(utilities) -> GameSpec:
    rows = tuple(tuple(float(u) for u in row) for row in utilities)
    return GameSpec(n_players=len(rows), valuation=FacilityValuation(utilities=rows))


def coverage_spec(weights, covers) -> GameSpec:
    return GameSpec(
        n_players=len(covers),
        valuation=CoverageValuation(
            weights=tuple(float(w) for w in weights),
            covers=tuple(tuple(c) for c in covers),
        ),
    )


def random_table_spec(n: int, seed: int) -> GameSpec:
    rng = np.random.default_rng(seed)
    values = rng.uniform(0.0, 1.0, size=2**n)
    values[0] = 0.0
    return table_spec(values)


def random_facility_spec(n: int, d: int, seed: int, high: int = 20) -> GameSpec:
    rng = np.random.default_rng(seed)
    return facility_spec(rng.integers(0, high + 1, size=(n, d)))


@pytest.fixture
def lab_config() -> LabConfig:
    return LabConfig()


@pytest.fixture
def example_game(lab_config) -> Game:
    """Three symmetric players with marginal contributions 3, 2, 1 by coalition size."""
    return Game(table_spec([0, 3, 3, 5, 3, 5, 5, 6]), lab_config)


@pytest.fixture
def two_facility_game(lab_config) -> Game:
    """One customer; facility 0 offers utility 2, facility 1 offers 1."""
    return Game(facility_spec([[2], [1]]), lab_config)


@pytest.fixture
def supermodular_pair(lab_config) -> Game:
    return Game(table_spec([0, 1, 0, 3]), lab_config)


@pytest.fixture
def additive_game(lab_config) -> Game:
    weights = np.array([1.0, 2.5, 4.0])
    values = [sum(weights[i] for i in range(3) if mask >> i & 1) for mask in range(8)]
    return Game(table_spec(values), lab_config)


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def write_game(tmp_path):
    """Write a GameSpec to a JSON file under tmp_path and return its path."""

    def _write(spec: GameSpec, name: str = "game.json"):
        path = tmp_path / name
        path.write_text(spec.model_dump_json(), encoding="utf-8")
        return path

    return _write
