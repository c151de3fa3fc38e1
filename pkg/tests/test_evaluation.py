import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from policyfrontier import (
    ActionSet,
    Cohort,
    FrontierPoint,
    PolicyEval,
    assemble_frontier,
    decision_cohort_analysis,
    doctor_eval,
    dominates,
    evaluate_policy,
    frontier_to_csv,
)
from policyfrontier.core import Policy
from policyfrontier.errors import ConfigError
from policyfrontier.evaluation import realized_outcomes


class FixedPolicy(Policy):
    """Returns a preset choice vector regardless of X."""

    def __init__(self, choice, n_features, has_defer=False):
        self.choice = np.asarray(choice, int)
        self.n_features = n_features
        self.has_defer = has_defer

    def decide(self, X):
        return self.choice[: X.shape[0]]


def make_cohort(Y, doctor=None, m=2, seed=0):
    Y = np.asarray(Y, int)
    X = np.random.default_rng(seed).standard_normal((Y.shape[0], m))
    names = tuple(f"f{i}" for i in range(m))
    return Cohort(X, Y, tuple(range(Y.shape[0])), names, doctor)


def pe(iat, cost):
    return PolicyEval(iat, cost, 0.0, 10)


class TestRealizedOutcomes:
    ACTIONS = ActionSet(("A", "B"), (0, 1))

    def test_oracle_brute_force_toy(self):
        # 10 units, known outcomes: verify IAT and cost by direct counting
        Y = np.array(
            [[1, 0], [0, 1], [1, 1], [0, 0], [1, 0],
             [0, 1], [1, 1], [0, 0], [1, 0], [0, 1]]
        )
        choice = np.array([0, 1, 0, 1, 1, 0, 1, 0, 0, 1])
        cohort = make_cohort(Y)
        benefit, cost, deferred = realized_outcomes(choice, cohort, self.ACTIONS)
        # hand count: picked outcomes are Y[i, choice[i]]
        want = np.array([1, 1, 1, 0, 0, 0, 1, 0, 1, 1], float)
        np.testing.assert_array_equal(benefit, want)
        assert cost.mean() == pytest.approx(0.5)
        assert not deferred.any()

    def test_defer_uses_doctor_outcome(self):
        Y = np.array([[0, 1], [1, 0]])
        doctor = np.array([1, 0])
        cohort = make_cohort(Y, doctor)
        choice = np.array([2, 2])  # both defer (index k)
        benefit, cost, deferred = realized_outcomes(choice, cohort, self.ACTIONS)
        np.testing.assert_array_equal(benefit, [1.0, 1.0])
        np.testing.assert_array_equal(cost, [1.0, 0.0])
        assert deferred.all()

    def test_defer_without_doctor_rejected(self):
        cohort = make_cohort(np.array([[1, 0]]))
        with pytest.raises(ConfigError):
            realized_outcomes(np.array([2]), cohort, self.ACTIONS)


class TestEvaluatePolicy:
    ACTIONS = ActionSet(("A", "B"), (0, 1))

    def test_always_defer_equals_doctor(self):
        rng = np.random.default_rng(1)
        n = 40
        Y = rng.integers(0, 2, (n, 2))
        doctor = rng.integers(0, 2, n)
        cohort = make_cohort(Y, doctor)
        pol = FixedPolicy(np.full(n, 2), 2, has_defer=True)
        got = evaluate_policy(pol, cohort, self.ACTIONS, n_bootstrap=0)
        doc = doctor_eval(cohort, self.ACTIONS, n_bootstrap=0)
        assert got.iat_rate == doc.iat_rate
        assert got.cost_rate == doc.cost_rate
        assert got.defer_rate == 1.0 and got.n_decided == 0

    def test_no_bootstrap_leaves_sds_absent(self):
        cohort = make_cohort(np.array([[1, 0], [0, 1]]))
        pol = FixedPolicy([0, 1], 2)
        got = evaluate_policy(pol, cohort, self.ACTIONS, n_bootstrap=0)
        assert got.bootstrap_mean is None and got.bootstrap_sd is None

    def test_bootstrap_centered_and_deterministic(self):
        rng = np.random.default_rng(2)
        n = 200
        Y = rng.integers(0, 2, (n, 2))
        cohort = make_cohort(Y)
        pol = FixedPolicy(rng.integers(0, 2, n), 2)
        a = evaluate_policy(pol, cohort, self.ACTIONS, n_bootstrap=30, seed=9)
        b = evaluate_policy(pol, cohort, self.ACTIONS, n_bootstrap=30, seed=9)
        assert a.bootstrap_mean == b.bootstrap_mean
        assert a.bootstrap_sd == b.bootstrap_sd
        sd = a.bootstrap_sd["iat_rate"]
        assert abs(a.bootstrap_mean["iat_rate"] - a.iat_rate) < 3 * sd

    def test_doctor_eval_hand_arithmetic(self):
        Y = np.array([[1, 0], [0, 1], [1, 1], [0, 0]])
        doctor = np.array([0, 0, 1, 1])
        cohort = make_cohort(Y, doctor)
        got = doctor_eval(cohort, self.ACTIONS, n_bootstrap=0)
        # realized benefits: 1, 0, 1, 0 -> IAT 0.5; costs 0,0,1,1 -> 0.5
        assert got.iat_rate == pytest.approx(0.5)
        assert got.cost_rate == pytest.approx(0.5)

    def test_doctor_eval_requires_column(self):
        with pytest.raises(ConfigError):
            doctor_eval(make_cohort(np.array([[1, 0]])), self.ACTIONS)


class TestDominance:
    def test_examples(self):
        assert dominates(pe(0.1, 0.2), pe(0.2, 0.2))
        assert dominates(pe(0.1, 0.1), pe(0.2, 0.2))
        assert not dominates(pe(0.1, 0.3), pe(0.2, 0.2))  # anti-chain
        assert not dominates(pe(0.1, 0.2), pe(0.1, 0.2))  # identical

    @settings(max_examples=200, deadline=None)
    @given(
        st.tuples(
            st.floats(0, 1, allow_nan=False), st.floats(0, 1, allow_nan=False)
        ),
        st.tuples(
            st.floats(0, 1, allow_nan=False), st.floats(0, 1, allow_nan=False)
        ),
    )
    def test_strict_partial_order(self, a, b):
        p, q = pe(*a), pe(*b)
        assert not dominates(p, p)  # irreflexive
        assert not (dominates(p, q) and dominates(q, p))  # asymmetric


class TestFrontier:
    def test_dominated_flags_and_order(self):
        pts = [
            FrontierPoint("reward-max", 0.9, pe(0.2, 0.2)),
            FrontierPoint("thresholding", 0.1, pe(0.1, 0.3)),
            FrontierPoint("baseline", None, pe(0.3, 0.3)),
        ]
        report = assemble_frontier(pts)
        assert [p.method for p, _ in report.rows] == [
            "thresholding", "reward-max", "baseline"
        ]
        assert [d for _, d in report.rows] == [False, False, True]
        assert len(report.non_dominated()) == 2

    def test_empty_rejected(self):
        with pytest.raises(ConfigError):
            assemble_frontier([])

    def test_csv_deterministic_and_well_formed(self):
        pts = [
            FrontierPoint("direct", 0.95, pe(0.15, 0.4)),
            FrontierPoint("doctor", None, pe(0.25, 0.5)),
        ]
        report = assemble_frontier(pts)
        csv1 = frontier_to_csv(report)
        csv2 = frontier_to_csv(assemble_frontier(pts))
        assert csv1 == csv2
        lines = csv1.strip().split("\n")
        assert lines[0] == "method,param,iat,iat_sd,cost,cost_sd,defer_rate,dominated"
        assert all(len(line.split(",")) == 8 for line in lines[1:])


class TestDecisionCohort:
    ACTIONS = ActionSet(("A", "B"), (0, 1))

    def test_paired_comparison_on_decided_subset(self):
        Y = np.array([[1, 0], [0, 1], [1, 1], [0, 0]])
        doctor = np.array([1, 1, 0, 0])
        cohort = make_cohort(Y, doctor)
        pol = FixedPolicy([0, 2, 0, 2], 2, has_defer=True)
        rep = decision_cohort_analysis(pol, cohort, self.ACTIONS)
        assert rep.defer_rate == 0.5 and rep.n_decided == 2
        # decided units 0 and 2: policy picks A on both -> benefits 1,1
        assert rep.policy_eval.iat_rate == pytest.approx(0.0)
        # doctor on same units: actions 1,0 -> benefits 0,1 -> IAT 0.5
        assert rep.doctor_eval.iat_rate == pytest.approx(0.5)

    def test_all_deferred_is_empty(self):
        Y = np.array([[1, 0], [0, 1]])
        cohort = make_cohort(Y, np.array([0, 1]))
        pol = FixedPolicy([2, 2], 2, has_defer=True)
        rep = decision_cohort_analysis(pol, cohort, self.ACTIONS)
        assert rep.empty and rep.policy_eval is None

    def test_non_deferring_policy_rejected(self):
        cohort = make_cohort(np.array([[1, 0]]), np.array([0]))
        with pytest.raises(ConfigError):
            decision_cohort_analysis(FixedPolicy([0], 2), cohort, self.ACTIONS)
