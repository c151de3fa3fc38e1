"""Per-action logistic effectiveness models with split-based tuning and ROC utilities."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import ActionSet, Cohort, Standardization, add_intercept
from .errors import ConfigError, DataError, DegenerateOutcomeError, SchemaError
from .optim import OptimizerConfig, minimize

DEFAULT_PENALTY_GRID = tuple(
    (kind, s) for kind in ("l2", "l1") for s in (1e-3, 1e-2, 1e-1, 1.0, 10.0)
)


@dataclass(frozen=True)
class LogisticModel:
    """Sigmoid-linear model of P(Y(a) = 1 | x) with frozen standardization."""

    weights: np.ndarray  # m + 1 coefficients, intercept last
    action: int
    action_label: str
    standardization: Standardization
    penalty: Tuple[str, float] = ("l2", 0.0)

    @property
    def n_features(self) -> int:
        return self.weights.size - 1

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise SchemaError(
                f"model expects {self.n_features} features, got shape {X.shape}"
            )
        z = add_intercept(self.standardization.transform(X)) @ self.weights
        return _sigmoid(z)

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "action": self.action,
            "action_label": self.action_label,
            "standardization": self.standardization.to_dict(),
            "penalty": list(self.penalty),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LogisticModel":
        return cls(
            np.asarray(d["weights"], float),
            int(d["action"]),
            d["action_label"],
            Standardization.from_dict(d["standardization"]),
            (d["penalty"][0], float(d["penalty"][1])),
        )


@dataclass(frozen=True)
class TuningPlan:
    """Repeated train/validation splits used for penalty selection."""

    n_splits: int = 20
    val_fraction: float = 0.30
    penalty_grid: tuple = DEFAULT_PENALTY_GRID
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.val_fraction < 1:
            raise ConfigError("val_fraction must be in (0, 1)")
        if self.n_splits < 1:
            raise ConfigError("n_splits must be positive")
        if not self.penalty_grid:
            raise ConfigError("penalty_grid must be non-empty")

    def splits(self, n: int):
        """Deterministic list of (train_idx, val_idx) pairs."""
        rng = np.random.default_rng(self.seed)
        n_val = max(1, int(round(self.val_fraction * n)))
        if n_val >= n:
            raise ConfigError("validation fraction leaves no training rows")
        out = []
        for _ in range(self.n_splits):
            perm = rng.permutation(n)
            out.append((perm[n_val:], perm[:n_val]))
        return out


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _logistic_loss_and_grad(w, Xb, y):
    z = Xb @ w
    p = _sigmoid(z)
    eps = 1e-12
    loss = -np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps))
    grad = Xb.T @ (p - y) / Xb.shape[0]
    return loss, grad


def fit_logistic(
    X: np.ndarray,
    y: np.ndarray,
    penalty: Tuple[str, float],
    opt: OptimizerConfig,
    standardization: Optional[Standardization] = None,
) -> Tuple[np.ndarray, Standardization]:
    """Fit weights (intercept last) on standardized X; penalty overrides config."""
    y = np.asarray(y, dtype=float)
    std = standardization or Standardization.fit(X)
    Xb = add_intercept(std.transform(X))
    kind, strength = penalty
    cfg_kwargs = dict(
        method=opt.method,
        learning_rate=opt.learning_rate,
        max_epochs=opt.max_epochs,
        batch_size=opt.batch_size,
        seed=opt.seed,
        l2_penalty=strength if kind == "l2" else 0.0,
        l1_penalty=strength if kind == "l1" else 0.0,
    )
    cfg = OptimizerConfig(**cfg_kwargs)
    penalize = np.ones(Xb.shape[1])
    penalize[-1] = 0.0  # intercept exempt
    init = np.zeros(Xb.shape[1])
    if cfg.batch_size is None:
        w, _ = minimize(lambda p: _logistic_loss_and_grad(p, Xb, y), init, cfg,
                        penalize=penalize)
    else:
        w, _ = minimize(
            lambda p, idx: _logistic_loss_and_grad(p, Xb[idx], y[idx]),
            init, cfg, penalize=penalize, n_samples=Xb.shape[0],
        )
    return w, std


def fit_outcome_models(
    cohort: Cohort,
    actions: ActionSet,
    plan: TuningPlan,
    opt: OptimizerConfig,
) -> List[LogisticModel]:
    """One tuned logistic model per action.

    For each action the penalty setting with the highest mean validation AUC
    across the plan's splits is refit on the full cohort.
    """
    for a, label in enumerate(actions.labels):
        if len(np.unique(cohort.Y[:, a])) < 2:
            raise DegenerateOutcomeError(
                f"outcome for action {label!r} has a single class"
            )
    splits = plan.splits(cohort.n)
    models = []
    for a, label in enumerate(actions.labels):
        y = cohort.Y[:, a].astype(float)
        best = None
        for penalty in plan.penalty_grid:
            aucs = []
            for train_idx, val_idx in splits:
                if len(np.unique(y[train_idx])) < 2 or len(np.unique(y[val_idx])) < 2:
                    continue
                w, std = fit_logistic(cohort.X[train_idx], y[train_idx], penalty, opt)
                scores = _sigmoid(
                    add_intercept(std.transform(cohort.X[val_idx])) @ w
                )
                aucs.append(auc_score(scores, y[val_idx]))
            if not aucs:
                raise DegenerateOutcomeError(
                    f"no usable split for action {label!r}: single-class splits"
                )
            mean_auc = float(np.mean(aucs))
            if best is None or mean_auc > best[0]:
                best = (mean_auc, penalty)
        _, penalty = best
        w, std = fit_logistic(cohort.X, y, penalty, opt)
        models.append(LogisticModel(w, a, label, std, penalty))
    return models


def predict_effectiveness(model: LogisticModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)


def predict_all(models: Sequence[LogisticModel], X: np.ndarray) -> np.ndarray:
    """n x K matrix of predicted effectiveness probabilities."""
    return np.column_stack([m.predict(X) for m in models])


def roc_points(scores: np.ndarray, labels: np.ndarray):
    """ROC sweep of the rule `predict positive iff score >= threshold`.

    Returns a list of (threshold, fpr, fnr, tpr) tuples, one per distinct
    score plus a top endpoint that predicts nothing positive, sorted by
    ascending threshold.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if len(np.unique(labels)) < 2:
        raise DataError("roc_points requires both classes present")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = int((~pos).sum())
    thresholds = np.unique(scores)
    top = min(1.0, float(thresholds.max()) + 1.0)
    if top <= thresholds.max():  # scores at/above 1.0: use an unreachable sentinel
        top = np.nextafter(float(thresholds.max()), np.inf)
    points = []
    for t in list(thresholds) + [top]:
        pred = scores >= t
        tpr = float(np.sum(pred & pos)) / n_pos
        fpr = float(np.sum(pred & ~pos)) / n_neg
        points.append((float(t), fpr, 1.0 - tpr, tpr))
    return points


def auc_from_roc(points) -> float:
    """Trapezoid area under the (FPR, TPR) curve."""
    # descending threshold makes both rates nondecreasing along the sweep
    order = np.argsort([-p[0] for p in points], kind="stable")
    fpr = np.array([points[i][1] for i in order])
    tpr = np.array([points[i][3] for i in order])
    fpr = np.concatenate([[0.0], fpr, [1.0]])
    tpr = np.concatenate([[0.0], tpr, [1.0]])
    trapezoid = getattr(np, "trapezoid", np.trapz)
    return float(trapezoid(tpr, fpr))


def auc_score(scores: np.ndarray, labels: np.ndarray) -> float:
    return auc_from_roc(roc_points(scores, labels))


def threshold_for_fnr(roc, target_fnr: float) -> float:
    """Largest threshold whose empirical FNR stays within target_fnr.

    FNR = fraction of truly positive (effective) cases scored below the
    threshold. Targets 0 and 1 are always achievable at the extremes.
    """
    if not 0.0 <= target_fnr <= 1.0:
        raise ConfigError("target_fnr must be in [0, 1]")
    feasible = [t for (t, fpr, fnr, tpr) in roc if fnr <= target_fnr]
    return max(feasible)
