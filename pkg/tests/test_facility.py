"""Tests for facility location games and the closed-form solvers."""

from __future__ import annotations

import time

import numpy as np
import pytest

from semivalue_lab.errors import PreconditionError
from semivalue_lab.facility import (
    UtilityMatrix,
    facility_replica_totals,
    facility_value,
    fast_banzhaf,
    fast_shapley,
    generate_facility_game,
    generate_facility_layout,
    generate_from_spec,
    read_utility_csv,
    replicate_facility_rows,
    sort_dimensions,
    write_utility_csv,
)
from semivalue_lab.game import Game
from semivalue_lab.models import FacilityGeneratorSpec
from semivalue_lab.replication import limit_cross_check
from semivalue_lab.semivalues import BANZHAF, SHAPLEY, exact_payoffs_all


class TestUtilityMatrix:
    def test_read_only_copy(self):
        source = np.array([[1.0, 2.0]])
        m = UtilityMatrix(source)
        source[0, 0] = 9.0
        assert m.utilities[0, 0] == 1.0
        assert not m.utilities.flags.writeable

    def test_negative_rejected(self):
        with pytest.raises(PreconditionError, match="non-negative"):
            UtilityMatrix(np.array([[1.0, -1.0]]))

    def test_empty_rejected(self):
        with pytest.raises(PreconditionError, match="non-empty"):
            UtilityMatrix(np.zeros((0, 3)))

    def test_spec_conversion(self):
        m = UtilityMatrix(np.array([[2.0], [1.0]]))
        assert m.to_spec().valuation.utilities == ((2.0,), (1.0,))
        np.testing.assert_array_equal(UtilityMatrix.from_spec(m.to_spec()).utilities, m.utilities)


class TestSortDimensions:
    def test_ties_share_dominated_count(self):
        dims = sort_dimensions(UtilityMatrix(np.array([[2.0], [2.0], [1.0]])))
        assert list(dims.dominated[:, 0]) == [1, 1, 0]
        assert list(dims.order[:, 0]) == [2, 0, 1]
        assert list(dims.rank[:, 0]) == [1, 2, 0]


class TestFacilityValue:
    def test_best_per_customer(self):
        m = UtilityMatrix(np.array([[3.0, 0.0], [1.0, 4.0]]))
        assert facility_value(m, [0, 1]) == 7.0
        assert facility_value(m, [1]) == 5.0
        assert facility_value(m, []) == 0.0

    def test_index_checked(self):
        with pytest.raises(PreconditionError):
            facility_value(UtilityMatrix(np.ones((2, 2))), [2])


class TestFastSolvers:
    def test_two_facilities(self):
        m = UtilityMatrix(np.array([[2.0], [1.0]]))
        np.testing.assert_allclose(fast_shapley(m), [1.5, 0.5])
        np.testing.assert_allclose(fast_banzhaf(m), [1.5, 0.5])

    def test_tied_column(self):
        m = UtilityMatrix(np.array([[2.0], [2.0], [1.0]]))
        np.testing.assert_allclose(fast_shapley(m), [5 / 6, 5 / 6, 1 / 3])

    def test_single_facility(self):
        m = UtilityMatrix(np.array([[4.0, 1.0]]))
        np.testing.assert_allclose(fast_shapley(m), [5.0])
        np.testing.assert_allclose(fast_banzhaf(m), [5.0])

    def test_matches_enumeration_on_random_matrices(self, lab_config):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            n = int(rng.integers(1, 13))
            d = int(rng.integers(1, 9))
            m = UtilityMatrix(rng.integers(0, 6, size=(n, d)).astype(np.float64))
            game = Game(m.to_spec(), lab_config)
            np.testing.assert_allclose(fast_shapley(m), exact_payoffs_all(game, SHAPLEY), atol=1e-9)
            np.testing.assert_allclose(fast_banzhaf(m), exact_payoffs_all(game, BANZHAF), atol=1e-9)

    def test_shapley_is_efficient(self):
        m = generate_facility_game(100, 10, seed=3)
        assert fast_shapley(m).sum() == pytest.approx(facility_value(m, range(100)))

    def test_large_game_stays_finite(self):
        m = generate_facility_game(64, 5, high=100, seed=1)
        assert np.all(np.isfinite(fast_shapley(m)))
        assert np.all(np.isfinite(fast_banzhaf(m)))

    @pytest.mark.slow
    def test_hundred_facilities_fast(self):
        m = generate_facility_game(100, 100, seed=0)
        start = time.perf_counter()
        fast_shapley(m)
        fast_banzhaf(m)
        assert time.perf_counter() - start < 1.0


class TestGenerators:
    def test_uniform_int_range_and_determinism(self):
        first = generate_facility_game(8, 5, low=2, high=4, seed=7)
        second = generate_facility_game(8, 5, low=2, high=4, seed=7)
        np.testing.assert_array_equal(first.utilities, second.utilities)
        assert first.utilities.min() >= 2 and first.utilities.max() <= 4
        assert np.all(first.utilities == np.round(first.utilities))

    def test_bad_range(self):
        with pytest.raises(PreconditionError, match="low <= high"):
            generate_facility_game(3, 3, low=5, high=1)

    def test_unknown_mode(self):
        with pytest.raises(PreconditionError, match="unknown facility generator"):
            generate_facility_game(3, 3, mode="ring")

    def test_manhattan_layout(self):
        layout = generate_facility_layout(6, 4, size=20, seed=0)
        assert layout.matrix.utilities.shape == (6, 4)
        distance = np.abs(layout.facilities[:, None, :] - layout.customers[None, :, :]).sum(axis=2)
        np.testing.assert_array_equal(layout.matrix.utilities, 100.0 - distance)

    def test_spec_seed_wins(self):
        spec = FacilityGeneratorSpec(n_facilities=4, n_customers=3, seed=5)
        np.testing.assert_array_equal(
            generate_from_spec(spec, seed=1).utilities,
            generate_facility_game(4, 3, seed=5).utilities,
        )

    def test_fallback_seed(self):
        spec = FacilityGeneratorSpec(n_facilities=4, n_customers=3, mode="manhattan-map")
        np.testing.assert_array_equal(
            generate_from_spec(spec, seed=9).utilities,
            generate_from_spec(spec, seed=9).utilities,
        )


class TestUtilityCsv:
    def test_write_then_read(self, tmp_path):
        m = generate_facility_game(5, 3, seed=2)
        path = tmp_path / "utilities.csv"
        write_utility_csv(m, path)
        assert path.read_text().splitlines()[0] == "d0,d1,d2"
        np.testing.assert_array_equal(read_utility_csv(path).utilities, m.utilities)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "utilities.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(PreconditionError, match="header must be d0,d1"):
            read_utility_csv(path)


class TestReplication:
    def test_rows_appended(self):
        m = UtilityMatrix(np.array([[1.0, 2.0], [3.0, 0.0]]))
        replicated = replicate_facility_rows(m, 0, 2)
        np.testing.assert_array_equal(replicated.utilities[2:], [[1.0, 2.0], [1.0, 2.0]])

    def test_bad_facility(self):
        with pytest.raises(PreconditionError, match="facility 2"):
            replicate_facility_rows(UtilityMatrix(np.ones((2, 1))), 2, 1)

    def test_shapley_totals_grow_and_banzhaf_totals_shrink(self):
        m = generate_facility_game(8, 6, seed=4)
        shapley = facility_replica_totals(m, 3, 10, "shapley")
        banzhaf = facility_replica_totals(m, 3, 10, "banzhaf")
        assert np.all(np.diff(shapley) >= -1e-9)
        assert np.all(banzhaf[1:] <= banzhaf[0] + 1e-9)

    def test_ten_facility_convergence(self, lab_config):
        m = generate_facility_game(10, 10, low=0, high=20, seed=0)
        shapley = facility_replica_totals(m, 0, 40, "shapley")
        banzhaf = facility_replica_totals(m, 0, 60, "banzhaf")
        assert np.all(np.diff(shapley) >= -1e-9)
        assert banzhaf[1] == pytest.approx(banzhaf[0])
        assert banzhaf[60] < 1e-3

        game = Game(m.to_spec(), lab_config)
        limit, horizon, value = limit_cross_check(game, SHAPLEY, 0)
        assert limit == facility_value(m, [0])
        assert horizon >= 500
        assert abs(value - limit) < 1e-3
        assert shapley[-1] <= limit + 1e-9
