"""Domain data model: action sets, cohorts, rewards, and the policy interface.

A cohort stores features X (n x m) together with the *full* per-action
outcome table Y (n x K): every unit's response to every action is known,
so policies can be evaluated exactly without off-policy correction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .errors import ConfigError, DataError, SchemaError


@dataclass(frozen=True)
class ActionSet:
    """Ordered action labels with a binary cost class per action.

    The label order is the canonical tie-break order: whenever scores tie,
    the lowest index wins.
    """

    labels: tuple
    cost_class: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        costs = tuple(int(c) for c in self.cost_class)
        if len(labels) < 2:
            raise ConfigError("an action set needs at least 2 actions")
        if len(set(labels)) != len(labels):
            raise ConfigError("action labels must be unique")
        if len(costs) != len(labels):
            raise ConfigError("cost_class length must match labels")
        if any(c not in (0, 1) for c in costs):
            raise ConfigError("cost_class entries must be 0 or 1")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "cost_class", costs)

    @property
    def k(self) -> int:
        return len(self.labels)

    def costs(self) -> np.ndarray:
        return np.asarray(self.cost_class, dtype=float)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DataError(f"unknown action label {label!r}") from None

    def to_dict(self) -> dict:
        return {
            "actions": [
                {"label": l, "cost": c} for l, c in zip(self.labels, self.cost_class)
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ActionSet":
        try:
            actions = d["actions"]
            labels = [a["label"] for a in actions]
            costs = [a["cost"] for a in actions]
        except (KeyError, TypeError) as e:
            raise SchemaError(f"malformed action-set config: {e}") from None
        return cls(tuple(labels), tuple(costs))

    @classmethod
    def from_json(cls, path) -> "ActionSet":
        with open(path) as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class Cohort:
    """Feature matrix plus fully observed per-action binary outcomes."""

    X: np.ndarray
    Y: np.ndarray
    ids: tuple
    feature_names: tuple
    doctor_action: Optional[np.ndarray] = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y)
        if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
            raise SchemaError("X and Y must be 2-d with matching row counts")
        if not np.all(np.isfinite(X)):
            raise DataError("feature matrix contains non-finite values")
        if not np.isin(Y, (0, 1)).all():
            raise DataError("outcome table entries must be 0 or 1")
        Y = Y.astype(np.int8)
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if self.doctor_action is not None:
            doc = np.asarray(self.doctor_action, dtype=int)
            if doc.shape != (X.shape[0],):
                raise SchemaError("doctor_action must have one entry per unit")
            if doc.size and (doc.min() < 0 or doc.max() >= Y.shape[1]):
                raise DataError("doctor_action contains an invalid action index")
            doc.setflags(write=False)
            object.__setattr__(self, "doctor_action", doc)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Cohort":
        idx = np.asarray(idx)
        doc = None if self.doctor_action is None else self.doctor_action[idx]
        ids = tuple(np.asarray(self.ids, dtype=object)[idx])
        return Cohort(self.X[idx], self.Y[idx], ids, self.feature_names, doc)

    def with_doctor(self, doctor_action) -> "Cohort":
        return Cohort(self.X, self.Y, self.ids, self.feature_names, doctor_action)


@dataclass(frozen=True)
class RewardSpec:
    """Preference weight and deferral bonus defining the scalarized reward."""

    omega: float
    lambda_defer: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.omega <= 1.0:
            raise ConfigError(f"omega must be in [0, 1], got {self.omega}")
        if self.lambda_defer < 0:
            raise ConfigError("lambda_defer must be nonnegative")


def load_cohort(path, actions: ActionSet) -> Cohort:
    """Read a cohort CSV validated against the given action set.

    Expected header: id, <features...>, y_<label> per action,
    optional doctor_action (holding action labels).
    """
    df = pd.read_csv(path)
    if "id" not in df.columns:
        raise SchemaError("missing required column 'id'")
    y_cols = [f"y_{l}" for l in actions.labels]
    for c in y_cols:
        if c not in df.columns:
            raise SchemaError(f"missing required outcome column '{c}'")
    has_doc = "doctor_action" in df.columns
    feat_cols = [
        c for c in df.columns if c not in ("id", "doctor_action") and c not in y_cols
    ]
    # rows missing any outcome are unusable for full evaluation
    df = df.dropna(subset=y_cols)

    Y = df[y_cols].to_numpy()
    bad = ~np.isin(Y, (0, 1)).all(axis=1)
    if bad.any():
        row_id = df["id"].to_numpy()[bad][0]
        raise DataError(f"non-binary outcome value in row id={row_id}")

    doc = None
    if has_doc:
        label_to_idx = {l: i for i, l in enumerate(actions.labels)}
        doc_labels = df["doctor_action"].astype(str).to_numpy()
        unknown = [l for l in doc_labels if l not in label_to_idx]
        if unknown:
            raise DataError(f"unknown doctor_action label {unknown[0]!r}")
        doc = np.array([label_to_idx[l] for l in doc_labels], dtype=int)

    X = df[feat_cols].to_numpy(dtype=float)
    if not np.all(np.isfinite(X)):
        raise DataError("feature matrix contains missing or non-finite values")
    return Cohort(X, Y.astype(int), tuple(df["id"]), tuple(feat_cols), doc)


def save_cohort(cohort: Cohort, actions: ActionSet, path) -> None:
    """Write a cohort back out in the canonical CSV schema."""
    data = {"id": list(cohort.ids)}
    for j, name in enumerate(cohort.feature_names):
        data[name] = cohort.X[:, j]
    for a, label in enumerate(actions.labels):
        data[f"y_{label}"] = cohort.Y[:, a]
    if cohort.doctor_action is not None:
        data["doctor_action"] = [actions.labels[i] for i in cohort.doctor_action]
    pd.DataFrame(data).to_csv(path, index=False)


def build_rewards(cohort: Cohort, actions: ActionSet, spec: RewardSpec) -> np.ndarray:
    """Scalarized reward table r[i, a] = omega * Y_i(a) + (1 - omega) * (1 - C(a)).

    When spec.lambda_defer > 0 a defer column is appended:
    r[i, defer] = r[i, doctor_action_i] + lambda_defer.
    """
    omega = spec.omega
    r = omega * cohort.Y.astype(float) + (1.0 - omega) * (1.0 - actions.costs())
    if spec.lambda_defer > 0:
        if cohort.doctor_action is None:
            raise ConfigError("lambda_defer > 0 requires doctor_action in the cohort")
        r_doc = r[np.arange(cohort.n), cohort.doctor_action]
        r = np.column_stack([r, r_doc + spec.lambda_defer])
    if r.size and r.min() < 0:
        raise ConfigError("reward table has negative entries")
    return r


class Policy:
    """Deterministic map from feature rows to action indices.

    Subclasses implement decide(X) for a 2-d feature matrix and expose
    n_features. Policies with a defer action set has_defer and return
    index K for defer; everything else is decide-only.
    """

    def decide(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


def apply_policy(policy: Policy, X: np.ndarray) -> np.ndarray:
    """Apply a policy to every row of X, validating dimensions."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise SchemaError("X must be 2-d")
    if X.shape[1] != policy.n_features:
        raise SchemaError(
            f"policy expects {policy.n_features} features, got {X.shape[1]}"
        )
    if X.shape[0] == 0:
        return np.empty(0, dtype=int)
    return np.asarray(policy.decide(X), dtype=int)


@dataclass(frozen=True)
class Standardization:
    """Per-feature z-score statistics frozen at fit time."""

    mean: np.ndarray
    sd: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardization":
        mean = X.mean(axis=0)
        sd = X.std(axis=0)
        sd = np.where(sd == 0, 1.0, sd)  # constant columns pass through
        return cls(mean, sd)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.mean) / self.sd

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "sd": self.sd.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardization":
        return cls(np.asarray(d["mean"], float), np.asarray(d["sd"], float))


def add_intercept(X: np.ndarray) -> np.ndarray:
    """Append a constant-1 column (intercept last by convention)."""
    return np.column_stack([X, np.ones(X.shape[0])])
