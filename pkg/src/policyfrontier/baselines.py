"""Baseline policies: unconstrained lowest-predicted-resistance selection and
the constrained variant with iteratively calibrated per-action cost offsets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import ActionSet, Cohort, Policy
from .errors import ConfigError
from .outcome_models import LogisticModel, predict_all


@dataclass(frozen=True)
class CalibratedCosts:
    """Per-action score offsets plus the calibration trace that produced them."""

    c: np.ndarray
    alpha: float
    max_iters: int
    tolerance: int
    converged: bool
    n_iters: int
    trace: tuple  # max |count deviation| per iteration

    def to_dict(self) -> dict:
        return {
            "c": self.c.tolist(),
            "alpha": self.alpha,
            "max_iters": self.max_iters,
            "tolerance": self.tolerance,
            "converged": self.converged,
            "n_iters": self.n_iters,
            "trace": list(self.trace),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CalibratedCosts":
        return cls(
            np.asarray(d["c"], float), float(d["alpha"]), int(d["max_iters"]),
            int(d["tolerance"]), bool(d["converged"]), int(d["n_iters"]),
            tuple(d["trace"]),
        )


def resistance_scores(models: Sequence[LogisticModel], X: np.ndarray) -> np.ndarray:
    """Predicted resistance = 1 - predicted effectiveness."""
    return 1.0 - predict_all(models, X)


def unconstrained_decide(models: Sequence[LogisticModel], x: np.ndarray) -> int:
    """Action with the lowest predicted resistance (ties to the lowest index)."""
    res = resistance_scores(models, np.atleast_2d(np.asarray(x, float)))
    return int(np.argmin(res, axis=1)[0])


def constrained_decide(
    models: Sequence[LogisticModel], costs: CalibratedCosts, x: np.ndarray
) -> int:
    """Action minimizing predicted resistance plus its calibrated offset."""
    res = resistance_scores(models, np.atleast_2d(np.asarray(x, float)))
    return int(np.argmin(res + costs.c, axis=1)[0])


def _counts(choice: np.ndarray, k: int) -> np.ndarray:
    return np.bincount(choice, minlength=k).astype(float)


def calibrate_costs(
    models: Sequence[LogisticModel],
    cohort: Cohort,
    target_counts: Optional[Sequence[int]] = None,
    alpha: Optional[float] = None,
    max_iters: int = 500,
    tolerance: Optional[int] = None,
) -> CalibratedCosts:
    """Iterate c <- c + alpha * (policy counts - target counts) to convergence.

    Targets default to the cohort's recorded clinician counts. Convergence
    means every action's count is within `tolerance` of its target; on
    non-convergence the best-seen offsets are returned with a flag.
    """
    k = len(models)
    n = cohort.n
    if alpha is None:
        alpha = 1.0 / n
    if alpha <= 0:
        raise ConfigError("alpha must be positive")
    if tolerance is None:
        tolerance = int(np.ceil(0.02 * n))
    if target_counts is None:
        if cohort.doctor_action is None:
            raise ConfigError("no target_counts and no doctor_action in cohort")
        targets = _counts(cohort.doctor_action, k)
    else:
        targets = np.asarray(target_counts, dtype=float)
        if targets.shape != (k,):
            raise ConfigError("target_counts must have one entry per action")
        if targets.sum() != n:
            raise ConfigError("target_counts must sum to the cohort size")

    res = resistance_scores(models, cohort.X)
    c = np.zeros(k)
    best_c = c.copy()
    best_dev = np.inf
    trace = []
    converged = False
    it = 0
    for it in range(max_iters + 1):
        counts = _counts(np.argmin(res + c, axis=1), k)
        deviation = counts - targets
        max_dev = float(np.abs(deviation).max())
        trace.append(max_dev)
        if max_dev < best_dev:
            best_dev = max_dev
            best_c = c.copy()
        if max_dev <= tolerance:
            converged = True
            best_c = c.copy()
            break
        c = c + alpha * deviation
    return CalibratedCosts(
        best_c, alpha, max_iters, tolerance, converged, it, tuple(trace)
    )


@dataclass(frozen=True)
class UnconstrainedPolicy(Policy):
    models: tuple

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))

    @property
    def n_features(self) -> int:
        return self.models[0].n_features

    def decide(self, X: np.ndarray) -> np.ndarray:
        return np.argmin(resistance_scores(self.models, X), axis=1)

    def to_dict(self) -> dict:
        return {
            "kind": "baseline-unconstrained",
            "models": [m.to_dict() for m in self.models],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UnconstrainedPolicy":
        return cls(tuple(LogisticModel.from_dict(m) for m in d["models"]))


@dataclass(frozen=True)
class ConstrainedPolicy(Policy):
    models: tuple
    costs: CalibratedCosts

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))

    @property
    def n_features(self) -> int:
        return self.models[0].n_features

    def decide(self, X: np.ndarray) -> np.ndarray:
        return np.argmin(resistance_scores(self.models, X) + self.costs.c, axis=1)

    def to_dict(self) -> dict:
        return {
            "kind": "baseline-constrained",
            "models": [m.to_dict() for m in self.models],
            "costs": self.costs.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConstrainedPolicy":
        return cls(
            tuple(LogisticModel.from_dict(m) for m in d["models"]),
            CalibratedCosts.from_dict(d["costs"]),
        )
