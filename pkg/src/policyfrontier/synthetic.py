"""Synthetic environment: nonlinear outcome models with a linear optimal rule.

Outcomes follow Y(a) | X ~ Bernoulli(sigmoid(X_a + sum_i alpha_i X_i^2 +
sum_(i,j) beta X_i X_j)) for a = 1..3 with shared nonlinear terms, so the
optimal rule reduces to argmax over the first three (linear) coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .core import ActionSet, Cohort
from .errors import CalibrationError, ConfigError

N_ACTIONS = 3

# manual defaults: every coefficient magnitude > 1, marginal outcome means
# land near 0.5 (checked by the calibration probe)
DEFAULT_ALPHA = tuple(1.5 * (1 if k % 2 == 0 else -1) for k in range(7))
DEFAULT_PAIRS = ((3, 4), (5, 6), (7, 8))  # 0-based feature index pairs
DEFAULT_BETA = (2.0, -2.0, 2.0)

PROBE_N = 100_000
PROBE_SEED = 987654321
MARGINAL_BAND = (0.4, 0.6)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass(frozen=True)
class SyntheticSpec:
    m: int = 10
    alpha: tuple = DEFAULT_ALPHA  # quadratic coefficients for features 3..m-1
    pairs: tuple = DEFAULT_PAIRS
    beta: tuple = DEFAULT_BETA
    seed: int = 0

    def __post_init__(self):
        if self.m < N_ACTIONS:
            raise ConfigError(f"need at least {N_ACTIONS} features")
        if len(self.alpha) != self.m - N_ACTIONS:
            raise ConfigError("alpha must cover features 3..m-1")
        if len(self.beta) != len(self.pairs):
            raise ConfigError("one beta per interaction pair")
        coeffs = tuple(self.alpha) + tuple(self.beta)
        if any(abs(c) <= 1.0 for c in coeffs):
            raise ConfigError("all coefficient magnitudes must exceed 1")
        for i, j in self.pairs:
            if not (0 <= i < self.m and 0 <= j < self.m and i != j):
                raise ConfigError(f"invalid interaction pair ({i}, {j})")

    def action_set(self) -> ActionSet:
        return ActionSet(("A1", "A2", "A3"), (0, 0, 1))

    def outcome_probs(self, X: np.ndarray) -> np.ndarray:
        """n x 3 matrix of P(Y(a) = 1 | X) under the generative model."""
        shared = np.zeros(X.shape[0])
        if self.alpha:
            shared = shared + (X[:, N_ACTIONS:] ** 2) @ np.asarray(self.alpha)
        for b, (i, j) in zip(self.beta, self.pairs):
            shared = shared + b * X[:, i] * X[:, j]
        return _sigmoid(X[:, :N_ACTIONS] + shared[:, None])

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "alpha": list(self.alpha),
            "pairs": [list(p) for p in self.pairs],
            "beta": list(self.beta),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SyntheticSpec":
        return cls(
            int(d["m"]),
            tuple(d["alpha"]),
            tuple(tuple(p) for p in d["pairs"]),
            tuple(d["beta"]),
            int(d["seed"]),
        )


_probe_cache: dict = {}


def probe_marginals(spec: SyntheticSpec) -> Tuple[float, ...]:
    """Per-action marginal outcome means on a fixed large probe sample.

    Raises CalibrationError if any marginal leaves the accepted band.
    Results are cached per spec parameters (the probe ignores spec.seed).
    """
    key = (spec.m, spec.alpha, spec.pairs, spec.beta)
    if key in _probe_cache:
        return _probe_cache[key]
    rng = np.random.default_rng(PROBE_SEED)
    X = rng.standard_normal((PROBE_N, spec.m))
    means = tuple(float(v) for v in spec.outcome_probs(X).mean(axis=0))
    lo, hi = MARGINAL_BAND
    for a, mu in enumerate(means):
        if not lo <= mu <= hi:
            raise CalibrationError(
                f"action {a} marginal outcome mean {mu:.3f} outside [{lo}, {hi}]"
            )
    _probe_cache[key] = means
    return means


def generate(spec: SyntheticSpec, n: int, seed: Optional[int] = None,
             check_calibration: bool = True) -> Cohort:
    """Draw a cohort of n units: X ~ N(0, I_m), Y(a) per the outcome model."""
    if n < 1:
        raise ConfigError("n must be at least 1")
    if check_calibration:
        probe_marginals(spec)
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    X = rng.standard_normal((n, spec.m))
    P = spec.outcome_probs(X)
    Y = (rng.random((n, N_ACTIONS)) < P).astype(int)
    feature_names = tuple(f"x{j + 1}" for j in range(spec.m))
    return Cohort(X, Y, tuple(range(n)), feature_names)


def bayes_policy(x: np.ndarray) -> np.ndarray:
    """Optimal rule: argmax over the first three coordinates (ties to lowest)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return int(np.argmax(x[:N_ACTIONS]))
    return np.argmax(x[:, :N_ACTIONS], axis=1)


def nonuniform_mask(Y: np.ndarray) -> np.ndarray:
    """Units with at least one effective and one ineffective action."""
    return (Y.min(axis=1) == 0) & (Y.max(axis=1) == 1)


def bayes_value(spec: SyntheticSpec, n_mc: int, seed: int) -> Tuple[float, float]:
    """Monte Carlo (value, standard error) of the optimal rule on the
    non-uniform-outcome subset."""
    cohort = generate(spec, n_mc, seed=seed)
    mask = nonuniform_mask(cohort.Y)
    choice = bayes_policy(cohort.X[mask])
    outcomes = cohort.Y[mask][np.arange(mask.sum()), choice].astype(float)
    return float(outcomes.mean()), float(outcomes.std(ddof=1) / np.sqrt(outcomes.size))


@dataclass(frozen=True)
class ClinicianSim:
    """Simulated clinician: a deterministic rule with uniform-random slips."""

    rule: Callable[[np.ndarray], np.ndarray]
    noise_rate: float = 0.0
    seed: int = 0
    n_actions: int = N_ACTIONS

    def __post_init__(self):
        if not 0.0 <= self.noise_rate <= 1.0:
            raise ConfigError("noise_rate must be in [0, 1]")

    def actions_for(self, X: np.ndarray) -> np.ndarray:
        choice = np.asarray(self.rule(X), dtype=int)
        if self.noise_rate > 0:
            rng = np.random.default_rng(self.seed)
            flip = rng.random(X.shape[0]) < self.noise_rate
            choice = np.where(
                flip, rng.integers(0, self.n_actions, size=X.shape[0]), choice
            )
        return choice


def simulate_clinician(sim: ClinicianSim, cohort: Cohort) -> Cohort:
    """Fill (or overwrite) doctor_action with the simulated clinician's choices."""
    return cohort.with_doctor(sim.actions_for(cohort.X))
