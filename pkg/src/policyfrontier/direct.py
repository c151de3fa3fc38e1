"""Direct policy optimization via the reward-weighted multinomial deviance surrogate."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import (
    ActionSet,
    Cohort,
    Policy,
    RewardSpec,
    Standardization,
    add_intercept,
    build_rewards,
)
from .errors import ConfigError, NotApplicableError
from .optim import EarlyStopRule, OptimizerConfig, minimize


@dataclass(frozen=True)
class LinearPolicy(Policy):
    """Argmax over linear column scores; optional trailing defer column.

    The defer column sits last, so the canonical lowest-index tie-break
    makes a real action win any tie with defer.
    """

    theta: np.ndarray  # (m + 1) x K' with intercept row last
    actions: ActionSet
    has_defer: bool
    standardization: Standardization
    omega: float
    lambda_defer: float = 0.0
    seed: Optional[int] = None
    argmin_decision: bool = False  # set when trained on regret-transformed rewards

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        k_expected = self.actions.k + (1 if self.has_defer else 0)
        if theta.ndim != 2 or theta.shape[1] != k_expected:
            raise ConfigError(
                f"theta must have {k_expected} columns, got shape {theta.shape}"
            )
        object.__setattr__(self, "theta", theta)

    @property
    def n_features(self) -> int:
        return self.theta.shape[0] - 1

    @property
    def defer_index(self) -> Optional[int]:
        return self.actions.k if self.has_defer else None

    def scores(self, X: np.ndarray) -> np.ndarray:
        Xb = add_intercept(self.standardization.transform(X))
        return Xb @ self.theta

    def decide(self, X: np.ndarray) -> np.ndarray:
        s = self.scores(X)
        if self.argmin_decision:
            return np.argmin(s, axis=1)
        return np.argmax(s, axis=1)

    def to_dict(self) -> dict:
        return {
            "kind": "linear",
            "theta": self.theta.tolist(),
            "actions": self.actions.to_dict(),
            "has_defer": self.has_defer,
            "standardization": self.standardization.to_dict(),
            "omega": self.omega,
            "lambda_defer": self.lambda_defer,
            "seed": self.seed,
            "argmin_decision": self.argmin_decision,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LinearPolicy":
        return cls(
            np.asarray(d["theta"], float),
            ActionSet.from_dict(d["actions"]),
            bool(d["has_defer"]),
            Standardization.from_dict(d["standardization"]),
            float(d["omega"]),
            float(d.get("lambda_defer", 0.0)),
            d.get("seed"),
            bool(d.get("argmin_decision", False)),
        )


def _softmax(F: np.ndarray) -> np.ndarray:
    Z = F - F.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def surrogate_loss_and_grad(
    theta: np.ndarray,
    Xb: np.ndarray,
    reward: np.ndarray,
    l2_penalty: float = 0.0,
) -> Tuple[float, np.ndarray]:
    """Reward-weighted negative log-softmax loss, averaged over units.

    Xb must already carry the intercept column (last); the penalty excludes
    the intercept row of theta. Gradient is exact: per unit,
    dL/dF_a = softmax_a * sum_a' r(a') - r(a).
    """
    reward = np.asarray(reward, dtype=float)
    if reward.size and reward.min() < 0:
        raise ConfigError("surrogate loss requires nonnegative rewards")
    n = Xb.shape[0]
    F = Xb @ theta
    Z = F - F.max(axis=1, keepdims=True)
    log_softmax = Z - np.log(np.exp(Z).sum(axis=1, keepdims=True))
    loss = -float(np.sum(reward * log_softmax)) / n
    dF = (_softmax(F) * reward.sum(axis=1, keepdims=True) - reward) / n
    grad = Xb.T @ dF
    if l2_penalty > 0:
        w = theta.copy()
        w[-1, :] = 0.0  # intercept row exempt
        loss += l2_penalty * float(np.sum(w * w))
        grad = grad + 2.0 * l2_penalty * w
    return loss, grad


def mean_realized_reward(
    policy_actions: np.ndarray, reward: np.ndarray
) -> float:
    """Mean reward actually collected by the chosen (possibly defer) actions."""
    return float(reward[np.arange(reward.shape[0]), policy_actions].mean())


def regret_transform(reward: np.ndarray) -> np.ndarray:
    """Per-unit transform r(a) -> max_a' r(a') - r(a) (nonnegative regrets).

    A policy trained on regrets must take the argmin of its scores; see
    LinearPolicy.argmin_decision.
    """
    reward = np.asarray(reward, dtype=float)
    return reward.max(axis=1, keepdims=True) - reward


def train_direct(
    cohort: Cohort,
    actions: ActionSet,
    spec: RewardSpec,
    opt: OptimizerConfig,
    stop: Optional[EarlyStopRule] = None,
    validation: Optional[Cohort] = None,
    use_regret_transform: bool = False,
) -> LinearPolicy:
    """Fit a LinearPolicy by minimizing the deviance surrogate.

    With an EarlyStopRule and validation cohort, the epoch with the best
    mean realized reward of the greedy policy on validation wins; otherwise
    training runs the full epoch budget.
    """
    reward = build_rewards(cohort, actions, spec)
    has_defer = reward.shape[1] == actions.k + 1
    if use_regret_transform:
        reward = regret_transform(reward)
    std = Standardization.fit(cohort.X)
    Xb = add_intercept(std.transform(cohort.X))
    k_prime = reward.shape[1]
    theta0 = np.zeros((Xb.shape[1], k_prime))

    penalize = np.ones_like(theta0)
    penalize[-1, :] = 0.0  # intercept row

    eval_fn = None
    if stop is not None:
        if validation is None:
            raise ConfigError("early stopping requires a validation cohort")
        val_reward = build_rewards(validation, actions, spec)
        Xv = add_intercept(std.transform(validation.X))
        pick = np.argmin if use_regret_transform else np.argmax

        def eval_fn(theta):
            # regret training still early-stops on realized reward
            choice = pick(Xv @ theta, axis=1)
            return mean_realized_reward(choice, val_reward)

    if opt.batch_size is None:
        theta, _ = minimize(
            lambda t: surrogate_loss_and_grad(t, Xb, reward),
            theta0, opt, stop=stop, eval_fn=eval_fn, penalize=penalize,
        )
    else:
        theta, _ = minimize(
            lambda t, idx: surrogate_loss_and_grad(t, Xb[idx], reward[idx]),
            theta0, opt, stop=stop, eval_fn=eval_fn, penalize=penalize,
            n_samples=Xb.shape[0],
        )
    return LinearPolicy(
        theta, actions, has_defer, std, spec.omega, spec.lambda_defer,
        seed=opt.seed, argmin_decision=use_regret_transform,
    )


def _group_contexts(X: np.ndarray):
    uniq, inverse = np.unique(np.asarray(X, float), axis=0, return_inverse=True)
    if uniq.shape[0] == X.shape[0] and X.shape[0] > 1:
        raise NotApplicableError(
            "calibration probe needs repeated discrete contexts"
        )
    return uniq, inverse


def calibration_probe(theta: np.ndarray, X: np.ndarray, reward: np.ndarray) -> float:
    """Max |softmax(scores) - normalized conditional mean reward| over contexts.

    X is taken in the same (already standardized, if any) space theta was
    trained in; an intercept column is appended here.
    """
    X = np.asarray(X, dtype=float)
    reward = np.asarray(reward, dtype=float)
    uniq, inverse = _group_contexts(X)
    probs = _softmax(add_intercept(uniq) @ theta)
    worst = 0.0
    for g in range(uniq.shape[0]):
        r_bar = reward[inverse == g].mean(axis=0)
        total = r_bar.sum()
        if total <= 0:
            continue
        worst = max(worst, float(np.abs(probs[g] - r_bar / total).max()))
    return worst


def convexity_probe(
    X: np.ndarray, reward: np.ndarray, trials: int = 1000, seed: int = 0
) -> bool:
    """Midpoint convexity check of the unpenalized surrogate on random pairs."""
    Xb = add_intercept(np.asarray(X, float))
    reward = np.asarray(reward, dtype=float)
    rng = np.random.default_rng(seed)
    shape = (Xb.shape[1], reward.shape[1])

    def loss(theta):
        n = Xb.shape[0]
        F = Xb @ theta
        Z = F - F.max(axis=1, keepdims=True)
        log_softmax = Z - np.log(np.exp(Z).sum(axis=1, keepdims=True))
        return -float(np.sum(reward * log_softmax)) / n

    for _ in range(trials):
        t1 = rng.standard_normal(shape)
        t2 = rng.standard_normal(shape)
        mid = loss(0.5 * (t1 + t2))
        if mid > 0.5 * loss(t1) + 0.5 * loss(t2) + 1e-10:
            return False
    return True
