"""Command tests for ``sweep``."""

import json

import pandas as pd
import pytest
from conftest import table_spec

from semivalue_lab.cli import cli
from semivalue_lab.commands.sweep import sweep_rows
from semivalue_lab.formatting import read_table
from semivalue_lab.models import SweepConfig

EXAMPLE = [0, 3, 3, 5, 3, 5, 5, 6]


def test_sweep_rows_for_example_game(example_game):
    rows = sweep_rows(example_game, SweepConfig(k_max=2, schemes=["shapley", "banzhaf", "loo"]))

    by_key = {(r["scheme"], r["k"]): r for r in rows}
    assert by_key[("shapley", 1)]["phi_tot"] == pytest.approx(7 / 3)
    assert by_key[("shapley", 0)]["limit"] == 3.0
    assert by_key[("banzhaf", 2)]["phi_tot"] == pytest.approx(1.5)
    assert by_key[("loo", 1)]["phi_tot"] == 0.0
    assert len(rows) == 9


def test_sweep_json_output(runner, write_game, tmp_path):
    game = write_game(table_spec(EXAMPLE))
    out = tmp_path / "sweep.json"

    result = runner.invoke(
        cli,
        ["--format", "json", "--out", str(out), "sweep", "--game", str(game), "--k-max", "3"],
    )

    assert result.exit_code == 0, result.output
    doc = json.loads(out.read_text())
    assert doc["metadata"]["command"] == "sweep"
    assert doc["metadata"]["config"]["k_max"] == 3
    assert [r["k"] for r in doc["rows"] if r["scheme"] == "shapley"] == [0, 1, 2, 3]


def test_sweep_custom_scheme_has_no_limit(runner, write_game, tmp_path):
    game = write_game(table_spec(EXAMPLE))
    out = tmp_path / "sweep.json"

    result = runner.invoke(
        cli,
        [
            "--format", "json", "--out", str(out),
            "sweep", "--game", str(game), "--k-max", "1", "--schemes", "shapley;custom:0.5,0.5",
        ],
    )

    assert result.exit_code == 0, result.output
    rows = json.loads(out.read_text())["rows"]
    custom = [r for r in rows if r["scheme"] == "custom:0.5,0.5"]
    assert len(custom) == 2
    assert all(r["limit"] is None for r in custom)


def test_sweep_csv_is_reproducible(runner, tmp_path):
    outputs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        result = runner.invoke(cli, ["--seed", "3", "--out", str(out), "sweep", "--k-max", "2"])
        assert result.exit_code == 0, result.output
        outputs.append(out.read_text())

    values = [[line for line in text.splitlines() if not line.startswith("#")] for text in outputs]
    assert values[0] == values[1]
    pd.testing.assert_frame_equal(read_table(outputs[0]), read_table(outputs[1]))
    assert "# seed: 3" in outputs[0]


def test_sweep_missing_game_file(runner, tmp_path):
    out = tmp_path / "sweep.csv"

    result = runner.invoke(
        cli, ["--out", str(out), "sweep", "--game", str(tmp_path / "missing.json")]
    )

    assert result.exit_code == 2
    assert "Game file not found" in result.output
    assert not out.exists()


def test_sweep_malicious_out_of_range(runner, write_game):
    game = write_game(table_spec(EXAMPLE))

    result = runner.invoke(cli, ["sweep", "--game", str(game), "--malicious", "5"])

    assert result.exit_code == 2
    assert "player 5 outside" in result.output


def test_sweep_unknown_scheme(runner, write_game):
    game = write_game(table_spec(EXAMPLE))

    result = runner.invoke(cli, ["sweep", "--game", str(game), "--schemes", "owen"])

    assert result.exit_code == 2
    assert "Unknown scheme" in result.output


def test_sweep_config_file_with_flag_override(runner, write_game, tmp_path):
    game = write_game(table_spec(EXAMPLE))
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"game": str(game), "k_max": 5, "schemes": ["banzhaf"]}))
    out = tmp_path / "sweep.json"

    result = runner.invoke(
        cli,
        ["--config", str(config), "--format", "json", "--out", str(out), "sweep", "--k-max", "1"],
    )

    assert result.exit_code == 0, result.output
    rows = json.loads(out.read_text())["rows"]
    assert [(r["scheme"], r["k"]) for r in rows] == [("banzhaf", 0), ("banzhaf", 1)]


def test_sweep_negative_k_max_is_invalid(runner, write_game):
    game = write_game(table_spec(EXAMPLE))

    result = runner.invoke(cli, ["sweep", "--game", str(game), "--k-max", "-1"])

    assert result.exit_code == 2
    assert "Invalid configuration" in result.output
