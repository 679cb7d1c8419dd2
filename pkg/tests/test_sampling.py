"""Tests for the shared-sample semivalue estimator and feasibility reconciliation."""

from __future__ import annotations

import numpy as np
import pytest
from conftest import random_facility_spec, random_table_spec

from semivalue_lab.config import LabConfig
from semivalue_lab.errors import CoverageError, PreconditionError
from semivalue_lab.facility import UtilityMatrix, facility_value
from semivalue_lab.game import Game
from semivalue_lab.sampling import (
    EstimateSet,
    allocate_budget,
    approximate_semivalue,
    draw_samples,
    estimate_payoffs,
    pairwise_differences,
    reconcile_feasibility,
    size_weights,
)
from semivalue_lab.semivalues import (
    BANZHAF,
    LOO,
    ROBUST_SHAPLEY,
    SHAPLEY,
    WeightScheme,
    exact_payoffs_all,
)


class TestAllocateBudget:
    def test_ties_go_to_smaller_size(self):
        assert list(allocate_budget(5, np.array([0, 1, 1, 0]))) == [0, 3, 2, 0]

    def test_proportional(self):
        assert list(allocate_budget(10, np.array([1, 3, 1]))) == [2, 6, 2]

    def test_all_zero_weights(self):
        with pytest.raises(PreconditionError, match="positive sum"):
            allocate_budget(4, np.zeros(3))


class TestSizeWeights:
    def test_uniform_skips_trivial_sizes(self):
        np.testing.assert_array_equal(size_weights("uniform", 4), [0, 1, 1, 1, 0])

    def test_single_player(self):
        np.testing.assert_array_equal(size_weights("uniform", 1), [0, 1])

    def test_explicit_length_checked(self):
        with pytest.raises(PreconditionError, match="needs 4 weights"):
            size_weights([1.0, 1.0], 3)

    def test_unknown_name(self):
        with pytest.raises(PreconditionError, match="unknown size distribution"):
            size_weights("geometric", 3)


class TestDrawSamples:
    def test_budget_plus_trivial_coalitions(self, lab_config):
        batch = draw_samples(Game(random_facility_spec(6, 3, seed=0), lab_config), 40, seed=1)
        assert len(batch.masks) == 42
        assert batch.masks[-2] == 0 and batch.masks[-1] == 2**6 - 1
        assert all(bin(int(m)).count("1") == s for m, s in zip(batch.masks, batch.sizes))

    def test_exhaustive_covers_every_coalition(self, example_game):
        batch = draw_samples(example_game, 1, q="exhaustive")
        assert sorted(batch.masks.tolist()) == list(range(8))

    def test_same_seed_same_draws(self, lab_config):
        game = Game(random_facility_spec(8, 3, seed=2), lab_config)
        first = draw_samples(game, 100, seed=42)
        second = draw_samples(game, 100, seed=42)
        np.testing.assert_array_equal(first.masks, second.masks)
        assert not np.array_equal(first.masks, draw_samples(game, 100, seed=43).masks)

    def test_windows_cover_every_player(self, lab_config):
        batch = draw_samples(Game(random_facility_spec(7, 2, seed=3), lab_config), 21, seed=0)
        for c in range(1, 7):
            if batch.size_count[c] >= -(-7 // c):
                assert np.all(batch.member_count[:, c] > 0)

    def test_above_cap_evaluates_directly(self):
        spec = random_facility_spec(5, 3, seed=4)
        batch = draw_samples(Game(spec, LabConfig(enumeration_cap=3)), 30, seed=0)
        m = UtilityMatrix.from_spec(spec)
        for coalition, value in batch.samples()[:10]:
            assert value == facility_value(m, coalition.members)

    def test_budget_must_be_positive(self, example_game):
        with pytest.raises(PreconditionError, match="budget"):
            draw_samples(example_game, 0)


class TestEstimatePayoffs:
    def test_two_facility_exhaustive(self, two_facility_game):
        est = estimate_payoffs(draw_samples(two_facility_game, 1, q="exhaustive"), SHAPLEY)
        np.testing.assert_allclose(est.phi_hat, [1.5, 0.5])
        assert est.phi_all == pytest.approx(2.0)

    @pytest.mark.parametrize(
        "scheme",
        [SHAPLEY, BANZHAF, LOO, ROBUST_SHAPLEY, WeightScheme.parse("custom:0.2,0.3,0.5")],
        ids=str,
    )
    def test_exhaustive_equals_exact(self, scheme, lab_config):
        game = Game(random_table_spec(5, 7), lab_config)
        est = estimate_payoffs(draw_samples(game, 1, q="exhaustive"), scheme)
        np.testing.assert_allclose(est.phi_hat, exact_payoffs_all(game, scheme), atol=1e-9)

    def test_total_for_shapley_is_grand_value(self, lab_config):
        game = Game(random_facility_spec(6, 3, seed=5), lab_config)
        est = estimate_payoffs(draw_samples(game, 200, seed=3), SHAPLEY)
        assert est.phi_all == pytest.approx(game.value_table()[-1])

    def test_undersized_budget_reports_cells(self, example_game):
        with pytest.raises(CoverageError, match=r"U\[2\]") as info:
            estimate_payoffs(draw_samples(example_game, 1, seed=0), SHAPLEY)
        assert (2, None) in info.value.missing

    def test_loo_needs_only_top_sizes(self, example_game):
        est = estimate_payoffs(draw_samples(example_game, 6, q=[0, 0, 1, 0], seed=0), LOO)
        np.testing.assert_allclose(est.phi_hat, [1.0, 1.0, 1.0])

    @pytest.mark.slow
    def test_unbiased_over_many_runs(self, lab_config):
        game = Game(random_facility_spec(8, 4, seed=8), lab_config)
        exact = exact_payoffs_all(game, SHAPLEY)
        runs = np.array(
            [estimate_payoffs(draw_samples(game, 128, seed=s), SHAPLEY).phi_hat for s in range(1000)]
        )
        standard_error = runs.std(axis=0, ddof=1) / np.sqrt(len(runs))
        assert np.all(np.abs(runs.mean(axis=0) - exact) <= 3 * standard_error + 1e-9)

    def test_error_shrinks_with_budget(self, lab_config):
        game = Game(random_facility_spec(8, 4, seed=9), lab_config)
        exact = exact_payoffs_all(game, SHAPLEY)

        def mean_error(budget: int) -> float:
            errors = [
                np.abs(estimate_payoffs(draw_samples(game, budget, seed=s), SHAPLEY).phi_hat - exact)
                for s in range(30)
            ]
            return float(np.mean(errors))

        assert mean_error(128) < mean_error(64)


class TestReconcileFeasibility:
    def test_projection(self):
        est = EstimateSet(phi_hat=np.array([1.6, 0.6]), phi_all=2.0)
        np.testing.assert_allclose(reconcile_feasibility(est), [1.5, 0.5])

    def test_keeps_gaps_and_total(self):
        est = EstimateSet(phi_hat=np.array([3.0, -1.0, 0.5, 2.0]), phi_all=10.0)
        prime = reconcile_feasibility(est)
        assert prime.sum() == pytest.approx(10.0)
        np.testing.assert_allclose(pairwise_differences(prime), pairwise_differences(est.phi_hat))

    def test_rejects_asymmetric_gaps(self):
        est = EstimateSet(phi_hat=np.array([1.0, 0.0]), phi_all=1.0)
        with pytest.raises(PreconditionError, match="antisymmetric"):
            reconcile_feasibility(est, np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_shape_checked(self):
        est = EstimateSet(phi_hat=np.array([1.0, 0.0]), phi_all=1.0)
        with pytest.raises(PreconditionError, match="2x2"):
            reconcile_feasibility(est, np.zeros((3, 3)))


class TestApproximateSemivalue:
    def test_reconciled_payoffs_are_efficient(self, lab_config):
        game = Game(random_facility_spec(7, 3, seed=1), lab_config)
        est = approximate_semivalue(game, SHAPLEY, 256, seed=5)
        assert est.phi_prime.sum() == pytest.approx(game.value_table()[-1])

    def test_deterministic_given_seed(self, lab_config):
        game = Game(random_facility_spec(7, 3, seed=1), lab_config)
        first = approximate_semivalue(game, BANZHAF, 128, seed=11)
        second = approximate_semivalue(game, BANZHAF, 128, seed=11)
        np.testing.assert_array_equal(first.phi_hat, second.phi_hat)
        np.testing.assert_array_equal(first.phi_prime, second.phi_prime)

    def test_records(self, two_facility_game):
        est = approximate_semivalue(two_facility_game, SHAPLEY, 1, q="exhaustive")
        records = est.to_records()
        assert records[0]["player"] == 0
        assert records[0]["phi_prime"] == pytest.approx(1.5)
