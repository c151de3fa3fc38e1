"""Policy evaluation: IAT/cost metrics, bootstrap, Pareto frontier, deferral analysis."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import ActionSet, Cohort, Policy, apply_policy
from .errors import ConfigError


@dataclass(frozen=True)
class PolicyEval:
    """Realized-outcome rates of a policy on a fully observed cohort."""

    iat_rate: float
    cost_rate: float
    defer_rate: float
    n_decided: int
    bootstrap_mean: Optional[dict] = None
    bootstrap_sd: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "iat_rate": self.iat_rate,
            "cost_rate": self.cost_rate,
            "defer_rate": self.defer_rate,
            "n_decided": self.n_decided,
            "bootstrap_mean": self.bootstrap_mean,
            "bootstrap_sd": self.bootstrap_sd,
        }


def realized_outcomes(
    choice: np.ndarray, cohort: Cohort, actions: ActionSet
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-unit (benefit, cost, deferred) with doctor outcomes on deferred units."""
    choice = np.asarray(choice, dtype=int)
    deferred = choice == actions.k
    if deferred.any():
        if cohort.doctor_action is None:
            raise ConfigError("policy defers but cohort has no doctor_action")
        effective = np.where(deferred, cohort.doctor_action, choice)
    else:
        effective = choice
    rows = np.arange(cohort.n)
    benefit = cohort.Y[rows, effective].astype(float)
    cost = actions.costs()[effective]
    return benefit, cost, deferred


def _eval_from_vectors(benefit, cost, deferred, n_bootstrap, seed) -> PolicyEval:
    n = benefit.size
    iat = float(1.0 - benefit.mean())
    cost_rate = float(cost.mean())
    defer_rate = float(deferred.mean())
    bmean = bsd = None
    if n_bootstrap > 0:
        rng = np.random.default_rng(seed)
        iats, costs, defers = [], [], []
        for _ in range(n_bootstrap):
            idx = rng.integers(0, n, size=n)
            iats.append(1.0 - benefit[idx].mean())
            costs.append(cost[idx].mean())
            defers.append(deferred[idx].mean())
        bmean = {
            "iat_rate": float(np.mean(iats)),
            "cost_rate": float(np.mean(costs)),
            "defer_rate": float(np.mean(defers)),
        }
        bsd = {
            "iat_rate": float(np.std(iats, ddof=1)) if n_bootstrap > 1 else 0.0,
            "cost_rate": float(np.std(costs, ddof=1)) if n_bootstrap > 1 else 0.0,
            "defer_rate": float(np.std(defers, ddof=1)) if n_bootstrap > 1 else 0.0,
        }
    return PolicyEval(iat, cost_rate, defer_rate, int(n - deferred.sum()), bmean, bsd)


def evaluate_policy(
    policy: Policy,
    cohort: Cohort,
    actions: ActionSet,
    n_bootstrap: int = 20,
    seed: int = 0,
) -> PolicyEval:
    """Point estimates on the full cohort plus bootstrap means/SDs.

    Each bootstrap resample has the same size as the cohort; deferred units
    realize the recorded clinician's outcomes.
    """
    choice = apply_policy(policy, cohort.X)
    benefit, cost, deferred = realized_outcomes(choice, cohort, actions)
    return _eval_from_vectors(benefit, cost, deferred, n_bootstrap, seed)


def doctor_eval(
    cohort: Cohort, actions: ActionSet, n_bootstrap: int = 20, seed: int = 0
) -> PolicyEval:
    """Clinician performance from the recorded actions and outcome tables."""
    if cohort.doctor_action is None:
        raise ConfigError("cohort has no doctor_action")
    benefit, cost, deferred = realized_outcomes(
        cohort.doctor_action, cohort, actions
    )
    return _eval_from_vectors(benefit, cost, deferred, n_bootstrap, seed)


@dataclass(frozen=True)
class FrontierPoint:
    method: str  # thresholding | reward-max | direct | baseline | doctor
    param: Optional[float]
    eval: PolicyEval
    policy_ref: Optional[str] = None


def dominates(p: PolicyEval, q: PolicyEval) -> bool:
    """Strict Pareto dominance on (IAT, cost): <= on both, < on at least one."""
    le = p.iat_rate <= q.iat_rate and p.cost_rate <= q.cost_rate
    lt = p.iat_rate < q.iat_rate or p.cost_rate < q.cost_rate
    return le and lt


@dataclass(frozen=True)
class FrontierReport:
    rows: tuple  # (FrontierPoint, dominated: bool), sorted by IAT

    def non_dominated(self) -> List[FrontierPoint]:
        return [p for p, d in self.rows if not d]


def assemble_frontier(points: Sequence[FrontierPoint]) -> FrontierReport:
    """Sort by IAT and flag points dominated by any other point."""
    if not points:
        raise ConfigError("assemble_frontier needs at least one point")
    ordered = sorted(
        points, key=lambda p: (p.eval.iat_rate, p.eval.cost_rate)
    )
    rows = []
    for p in ordered:
        dominated = any(dominates(q.eval, p.eval) for q in ordered if q is not p)
        rows.append((p, dominated))
    return FrontierReport(tuple(rows))


FRONTIER_CSV_HEADER = "method,param,iat,iat_sd,cost,cost_sd,defer_rate,dominated"


def frontier_to_csv(report: FrontierReport) -> str:
    """Plot-ready CSV (no trailing whitespace; deterministic formatting)."""
    lines = [FRONTIER_CSV_HEADER]
    for p, dominated in report.rows:
        sd = p.eval.bootstrap_sd or {}
        lines.append(
            ",".join(
                [
                    p.method,
                    "" if p.param is None else f"{p.param:.6g}",
                    f"{p.eval.iat_rate:.6f}",
                    f"{sd.get('iat_rate', 0.0):.6f}",
                    f"{p.eval.cost_rate:.6f}",
                    f"{sd.get('cost_rate', 0.0):.6f}",
                    f"{p.eval.defer_rate:.6f}",
                    str(int(dominated)),
                ]
            )
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DecisionCohortReport:
    """Doctor vs. policy comparison restricted to units the policy decided."""

    defer_rate: float
    n_decided: int
    policy_eval: Optional[PolicyEval]
    doctor_eval: Optional[PolicyEval]

    @property
    def empty(self) -> bool:
        return self.n_decided == 0


def decision_cohort_analysis(
    policy: Policy,
    cohort: Cohort,
    actions: ActionSet,
    n_bootstrap: int = 0,
    seed: int = 0,
) -> DecisionCohortReport:
    """Paired evaluation on the subset where the policy takes its own action."""
    if not getattr(policy, "has_defer", False):
        raise ConfigError("decision_cohort_analysis requires a deferring policy")
    if cohort.doctor_action is None:
        raise ConfigError("cohort has no doctor_action")
    choice = apply_policy(policy, cohort.X)
    decided = choice != actions.k
    n_decided = int(decided.sum())
    defer_rate = float(1.0 - decided.mean())
    if n_decided == 0:
        return DecisionCohortReport(defer_rate, 0, None, None)
    sub = cohort.subset(np.where(decided)[0])
    benefit, cost, deferred = realized_outcomes(choice[decided], sub, actions)
    pol = _eval_from_vectors(benefit, cost, deferred, n_bootstrap, seed)
    doc = doctor_eval(sub, actions, n_bootstrap=n_bootstrap, seed=seed)
    return DecisionCohortReport(defer_rate, n_decided, pol, doc)
