import itertools

import numpy as np
import pytest

from policyfrontier import (
    ActionSet,
    Cohort,
    BudgetGrid,
    RewardMaxPolicy,
    ThresholdGrid,
    ThresholdPolicy,
    reward_max_decide,
    search_thresholds,
    sweep_omega,
    threshold_decide,
)
from policyfrontier.core import Standardization
from policyfrontier.errors import ConfigError
from policyfrontier.indirect import DEFAULT_OMEGAS, decide_from_probs
from policyfrontier.outcome_models import LogisticModel


class StubModel:
    """Model whose prediction is a fixed column of a lookup: predict(X) = X @ e_a."""

    def __init__(self, column, n_features):
        self.column = column
        self.n_features = n_features
        self.action_label = f"a{column}"

    def predict(self, X):
        return np.asarray(X, float)[:, self.column]


def stub_models(k):
    return tuple(StubModel(a, k) for a in range(k))


class TestThresholdDecide:
    ACTIONS = ActionSet(("NIT", "SXT", "CIP", "LVX"), (0, 0, 1, 1))

    def make_policy(self, thresholds):
        return ThresholdPolicy(stub_models(4), thresholds, self.ACTIONS, 0)

    def test_min_cost_among_effective(self):
        pol = self.make_policy(np.array([0.7, 0.7, 0.9, 0.9]))
        # f = (0.6, 0.8, 0.9, 0.95): effective {SXT, CIP, LVX}, SXT is cheapest
        assert threshold_decide(pol, [0.6, 0.8, 0.9, 0.95]) == 1

    def test_fallback_to_default(self):
        pol = self.make_policy(np.array([0.7, 0.7, 0.9, 0.9]))
        assert threshold_decide(pol, [0.1, 0.1, 0.1, 0.1]) == 0

    def test_zero_thresholds_pick_cheapest_lowest_index(self):
        pol = self.make_policy(np.zeros(4))
        assert threshold_decide(pol, [0.5, 0.9, 0.99, 0.99]) == 0

    def test_monotone_in_threshold(self):
        rng = np.random.default_rng(0)
        probs = rng.random((50, 4))
        lo = decide_from_probs(probs, np.array([0.3, 0.5, 0.5, 0.5]), self.ACTIONS, 0)
        hi = decide_from_probs(probs, np.array([0.8, 0.5, 0.5, 0.5]), self.ACTIONS, 0)
        # raising t_0 never adds units to action 0
        assert set(np.where(hi == 0)[0]) - set(np.where(lo == 0)[0]) == set()

    def test_costly_default_rejected(self):
        with pytest.raises(ConfigError):
            ThresholdPolicy(stub_models(4), np.zeros(4), self.ACTIONS, 2)


def brute_force_search(probs_val, Y_val, costs, table, groups, budgets):
    """Exhaustive oracle over all level combinations, lexicographic tie-break."""
    n_levels = table.shape[1]
    k = len(costs)
    results = []
    actions = ActionSet(tuple(f"a{i}" for i in range(k)), tuple(costs))
    for combo in itertools.product(range(n_levels), repeat=len(groups)):
        t = np.empty(k)
        for g, li in zip(groups, combo):
            for a in g:
                t[a] = table[a, li]
        choice = decide_from_probs(probs_val, t, actions, 0)
        benefit = Y_val[np.arange(len(choice)), choice].mean()
        cost = np.asarray(costs, float)[choice].mean()
        results.append((t, benefit, cost))
    out = {}
    for b in budgets:
        best = None
        for t, benefit, cost in results:
            if cost <= b and (best is None or benefit > best[1]):
                best = (t, benefit)
        out[b] = best[0] if best else np.ones(k)
    return out


class TestSearchThresholds:
    def setup_method(self):
        rng = np.random.default_rng(42)
        self.k = 3
        self.actions = ActionSet(("a0", "a1", "a2"), (0, 0, 1))
        n = 40
        # features double as predictions via StubModel
        self.X = rng.random((n, 3))
        self.Y = rng.integers(0, 2, size=(n, 3))
        self.cohort = Cohort(self.X, self.Y, tuple(range(n)), ("p0", "p1", "p2"))
        self.models = stub_models(3)
        self.table = np.tile(np.array([0.25, 0.5, 0.75]), (3, 1))
        self.grid = ThresholdGrid(fnr_levels=(0.0, 0.5, 1.0))
        self.budgets = BudgetGrid((0.05, 0.25, 0.5, 1.0))

    def test_matches_brute_force_oracle(self):
        got = search_thresholds(
            self.models, self.grid, self.cohort, self.budgets,
            actions=self.actions, threshold_table=self.table,
        )
        groups = self.grid.groups(3)
        want = brute_force_search(
            self.X, self.Y, self.actions.cost_class, self.table, groups,
            self.budgets.budgets,
        )
        for b in self.budgets.budgets:
            np.testing.assert_allclose(got[b].thresholds, want[b])

    def test_budget_monotonicity(self):
        got = search_thresholds(
            self.models, self.grid, self.cohort, self.budgets,
            actions=self.actions, threshold_table=self.table,
        )
        costs = self.actions.costs()
        prev_benefit = -1.0
        for b in self.budgets.budgets:
            choice = got[b].decide(self.X)
            benefit = self.Y[np.arange(len(choice)), choice].mean()
            assert costs[choice].mean() <= b + 1e-12
            assert benefit >= prev_benefit - 1e-12
            prev_benefit = benefit

    def test_vacuous_budget_is_unconstrained_argmax(self):
        got = search_thresholds(
            self.models, self.grid, self.cohort, BudgetGrid((1.0,)),
            actions=self.actions, threshold_table=self.table,
        )
        groups = self.grid.groups(3)
        want = brute_force_search(
            self.X, self.Y, self.actions.cost_class, self.table, groups, [1.0]
        )
        np.testing.assert_allclose(got[1.0].thresholds, want[1.0])

    def test_tie_group_shares_threshold(self):
        grid = ThresholdGrid(fnr_levels=(0.0, 0.5, 1.0), tie_groups=((1, 2),))
        got = search_thresholds(
            self.models, grid, self.cohort, self.budgets,
            actions=self.actions, threshold_table=self.table,
        )
        for pol in got.values():
            assert pol.thresholds[1] == pol.thresholds[2]

    def test_grid_cardinality(self):
        grid = ThresholdGrid(
            fnr_levels=tuple(np.linspace(0, 1, 11)), tie_groups=((2, 3),)
        )
        groups, combos = grid.combinations(4)
        assert len(groups) == 3
        assert sum(1 for _ in combos) == 1331


class TestRewardMax:
    ACTIONS = ActionSet(("NIT", "SXT", "CIP", "LVX"), (0, 0, 1, 1))

    def test_omega_one_is_pure_effectiveness(self):
        pol = RewardMaxPolicy(stub_models(4), 1.0, self.ACTIONS)
        assert reward_max_decide(pol, [0.2, 0.9, 0.5, 0.1]) == 1

    def test_omega_zero_picks_cheapest_lowest_index(self):
        pol = RewardMaxPolicy(stub_models(4), 0.0, self.ACTIONS)
        assert reward_max_decide(pol, [0.1, 0.99, 0.99, 0.99]) == 0

    def test_eq6_arithmetic(self):
        # omega=0.8: predicted rewards (0.76, 0.76, 0.76, 0.72)
        probs = np.array([0.7, 0.7, 0.95, 0.9])
        scores = 0.8 * probs + (1 - 0.8) * (1 - self.ACTIONS.costs())
        np.testing.assert_allclose(scores, [0.76, 0.76, 0.76, 0.72], atol=1e-12)

    def test_exact_tie_breaks_to_lowest_index(self):
        # equal predictions for equal-cost actions tie exactly in floats
        pol = RewardMaxPolicy(stub_models(4), 0.8, self.ACTIONS)
        assert reward_max_decide(pol, [0.7, 0.7, 0.6, 0.6]) == 0
        assert reward_max_decide(pol, [0.2, 0.3, 0.9, 0.9]) == 2

    def test_scale_invariance_of_argmax(self):
        pol = RewardMaxPolicy(stub_models(4), 0.6, self.ACTIONS)
        x = np.array([[0.3, 0.8, 0.55, 0.42]])
        base = pol.decide(x)[0]
        # multiplying all predicted rewards by c > 0 keeps the argmax
        scores = 0.6 * x + 0.4 * (1 - self.ACTIONS.costs())
        for c in (0.5, 2.0, 10.0):
            assert np.argmax(c * scores) == base

    def test_sweep_dedupes_and_default_grid(self):
        models = stub_models(4)
        pols = sweep_omega(models, [0.9, 0.9, 1.0], self.ACTIONS)
        assert [p.omega for p in pols] == [0.9, 1.0]
        assert len(sweep_omega(models, None, self.ACTIONS)) == 31
        assert len(DEFAULT_OMEGAS) == 31

    def test_single_omega(self):
        pols = sweep_omega(stub_models(4), [1.0], self.ACTIONS)
        assert len(pols) == 1 and pols[0].omega == 1.0


class TestSerialization:
    def test_threshold_policy_round_trip(self):
        actions = ActionSet(("A", "B"), (0, 1))
        models = tuple(
            LogisticModel(
                np.array([0.5, -0.1]), a, actions.labels[a],
                Standardization(np.zeros(1), np.ones(1)),
            )
            for a in range(2)
        )
        pol = ThresholdPolicy(models, np.array([0.4, 0.6]), actions, 0)
        back = ThresholdPolicy.from_dict(pol.to_dict())
        X = np.random.default_rng(0).normal(size=(8, 1))
        np.testing.assert_array_equal(pol.decide(X), back.decide(X))

    def test_reward_max_round_trip(self):
        actions = ActionSet(("A", "B"), (0, 1))
        models = tuple(
            LogisticModel(
                np.array([1.0, 0.2]), a, actions.labels[a],
                Standardization(np.zeros(1), np.ones(1)),
            )
            for a in range(2)
        )
        pol = RewardMaxPolicy(models, 0.88, actions)
        back = RewardMaxPolicy.from_dict(pol.to_dict())
        X = np.random.default_rng(1).normal(size=(8, 1))
        np.testing.assert_array_equal(pol.decide(X), back.decide(X))
        assert back.omega == 0.88
