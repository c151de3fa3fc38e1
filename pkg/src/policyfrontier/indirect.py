"""Indirect policy learners: threshold grid search and expected reward maximization."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import ActionSet, Cohort, Policy
from .errors import ConfigError
from .outcome_models import LogisticModel, predict_all, roc_points, threshold_for_fnr

DEFAULT_FNR_LEVELS = tuple(np.linspace(0.0, 1.0, 11))
# default budget grid: fine steps at low budget, coarser above 0.05
DEFAULT_BUDGETS = tuple(
    np.round(np.concatenate([np.arange(0.01, 0.051, 0.01),
                             np.arange(0.075, 1.001, 0.025)]), 4)
)
DEFAULT_OMEGAS = tuple(np.round(np.arange(0.85, 1.0001, 0.005), 4))


@dataclass(frozen=True)
class ThresholdPolicy(Policy):
    """Pick the cheapest action predicted effective; fall back to a default."""

    models: tuple
    thresholds: np.ndarray
    actions: ActionSet
    default_action: int

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=float)
        if t.shape != (self.actions.k,):
            raise ConfigError("one threshold per action required")
        if t.min() < 0 or t.max() > 1:
            raise ConfigError("thresholds must lie in [0, 1]")
        if self.actions.cost_class[self.default_action] != 0:
            raise ConfigError("default_action must have cost class 0")
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "thresholds", t)

    @property
    def n_features(self) -> int:
        return self.models[0].n_features

    def decide(self, X: np.ndarray) -> np.ndarray:
        return decide_from_probs(
            predict_all(self.models, X), self.thresholds, self.actions,
            self.default_action,
        )

    def to_dict(self) -> dict:
        return {
            "kind": "threshold",
            "models": [m.to_dict() for m in self.models],
            "thresholds": self.thresholds.tolist(),
            "actions": self.actions.to_dict(),
            "default_action": self.default_action,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ThresholdPolicy":
        return cls(
            tuple(LogisticModel.from_dict(m) for m in d["models"]),
            np.asarray(d["thresholds"], float),
            ActionSet.from_dict(d["actions"]),
            int(d["default_action"]),
        )


def decide_from_probs(
    probs: np.ndarray, thresholds: np.ndarray, actions: ActionSet, default_action: int
) -> np.ndarray:
    """Vectorized threshold rule on a precomputed probability matrix."""
    effective = probs >= thresholds
    # rank = cost first, then canonical index, so argmin picks the rule's winner
    rank = actions.costs() * actions.k + np.arange(actions.k)
    keyed = np.where(effective, rank, np.inf)
    choice = np.argmin(keyed, axis=1)
    none_effective = ~effective.any(axis=1)
    choice[none_effective] = default_action
    return choice


@dataclass(frozen=True)
class ThresholdGrid:
    """FNR levels crossed over threshold groups (tied actions share a level)."""

    fnr_levels: tuple = DEFAULT_FNR_LEVELS
    tie_groups: tuple = ()  # each entry: tuple of action indices sharing a level

    def groups(self, k: int):
        """Free groups in canonical order; untied actions become singletons."""
        tied = set()
        groups = []
        for g in self.tie_groups:
            groups.append(tuple(g))
            tied.update(g)
        for a in range(k):
            if a not in tied:
                groups.append((a,))
        groups.sort(key=lambda g: min(g))
        return groups

    def combinations(self, k: int):
        """Lexicographic level assignments, one level index per free group."""
        groups = self.groups(k)
        n_levels = len(self.fnr_levels)
        return groups, itertools.product(range(n_levels), repeat=len(groups))


@dataclass(frozen=True)
class BudgetGrid:
    budgets: tuple = DEFAULT_BUDGETS

    def __post_init__(self):
        b = tuple(float(x) for x in self.budgets)
        if any(not 0 < x <= 1 for x in b):
            raise ConfigError("budgets must lie in (0, 1]")
        if list(b) != sorted(set(b)):
            raise ConfigError("budgets must be sorted ascending and unique")
        object.__setattr__(self, "budgets", b)


def threshold_decide(policy: ThresholdPolicy, x: np.ndarray) -> int:
    """Single-row convenience wrapper over ThresholdPolicy.decide."""
    return int(policy.decide(np.atleast_2d(np.asarray(x, float)))[0])


def thresholds_from_fnr_levels(
    models: Sequence[LogisticModel], train: Cohort, fnr_levels: Sequence[float]
) -> np.ndarray:
    """K x L table mapping each FNR level to a probability threshold per action,
    calibrated on training-set predictions."""
    table = np.empty((len(models), len(fnr_levels)))
    for a, model in enumerate(models):
        roc = roc_points(model.predict(train.X), train.Y[:, a])
        for j, level in enumerate(fnr_levels):
            table[a, j] = threshold_for_fnr(roc, level)
    return table


def search_thresholds(
    models: Sequence[LogisticModel],
    grid: ThresholdGrid,
    validation: Union[Cohort, Sequence[Cohort]],
    budgets: BudgetGrid,
    train: Optional[Cohort] = None,
    default_action: Optional[int] = None,
    actions: Optional[ActionSet] = None,
    threshold_table: Optional[np.ndarray] = None,
) -> Dict[float, ThresholdPolicy]:
    """Exhaustive grid search: per budget, the feasible combination with the
    highest mean validation benefit.

    Benefit/cost for each combination are averaged across the given
    validation cohorts. FNR levels are converted to probability thresholds
    on the training cohort unless a precomputed threshold_table is given.
    Budgets with no feasible combination fall back to the all-default policy.
    """
    if actions is None:
        raise ConfigError("actions must be provided")
    if threshold_table is None:
        if train is None:
            raise ConfigError("either train cohort or threshold_table required")
        threshold_table = thresholds_from_fnr_levels(models, train, grid.fnr_levels)
    if default_action is None:
        default_action = min(
            a for a in range(actions.k) if actions.cost_class[a] == 0
        )
    val_cohorts = [validation] if isinstance(validation, Cohort) else list(validation)

    probs = [predict_all(models, c.X) for c in val_cohorts]
    costs = actions.costs()
    groups, combos = grid.combinations(actions.k)

    results = []  # (combo_index, thresholds, mean_benefit, mean_cost)
    for idx, combo in enumerate(combos):
        t = np.empty(actions.k)
        for g, level_idx in zip(groups, combo):
            for a in g:
                t[a] = threshold_table[a, level_idx]
        benefit = 0.0
        cost = 0.0
        for c, p in zip(val_cohorts, probs):
            choice = decide_from_probs(p, t, actions, default_action)
            rows = np.arange(c.n)
            benefit += c.Y[rows, choice].mean()
            cost += costs[choice].mean()
        results.append((idx, t, benefit / len(val_cohorts), cost / len(val_cohorts)))

    all_default = np.ones(actions.k)  # thresholds 1.0: nothing predicted effective
    out = {}
    for b in budgets.budgets:
        best = None
        for idx, t, benefit, cost in results:
            if cost <= b and (best is None or benefit > best[1]):
                best = (idx, benefit, t)
        chosen_t = best[2] if best is not None else all_default
        out[b] = ThresholdPolicy(tuple(models), chosen_t, actions, default_action)
    return out


@dataclass(frozen=True)
class RewardMaxPolicy(Policy):
    """Argmax of the predicted scalarized reward omega*f_a + (1-omega)*(1-C)."""

    models: tuple
    omega: float
    actions: ActionSet

    def __post_init__(self):
        if not 0.0 <= self.omega <= 1.0:
            raise ConfigError("omega must be in [0, 1]")
        object.__setattr__(self, "models", tuple(self.models))

    @property
    def n_features(self) -> int:
        return self.models[0].n_features

    def decide(self, X: np.ndarray) -> np.ndarray:
        probs = predict_all(self.models, X)
        scores = self.omega * probs + (1.0 - self.omega) * (1.0 - self.actions.costs())
        return np.argmax(scores, axis=1)  # np.argmax takes the lowest tied index

    def to_dict(self) -> dict:
        return {
            "kind": "reward-max",
            "models": [m.to_dict() for m in self.models],
            "omega": self.omega,
            "actions": self.actions.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RewardMaxPolicy":
        return cls(
            tuple(LogisticModel.from_dict(m) for m in d["models"]),
            float(d["omega"]),
            ActionSet.from_dict(d["actions"]),
        )


def reward_max_decide(policy: RewardMaxPolicy, x: np.ndarray) -> int:
    return int(policy.decide(np.atleast_2d(np.asarray(x, float)))[0])


def sweep_omega(
    models: Sequence[LogisticModel],
    omegas: Optional[Sequence[float]] = None,
    actions: Optional[ActionSet] = None,
) -> List[RewardMaxPolicy]:
    """One RewardMaxPolicy per distinct omega (first occurrence order kept)."""
    if actions is None:
        raise ConfigError("actions must be provided")
    if omegas is None:
        omegas = DEFAULT_OMEGAS
    seen = []
    for w in omegas:
        w = float(w)
        if w not in seen:
            seen.append(w)
    return [RewardMaxPolicy(tuple(models), w, actions) for w in seen]
