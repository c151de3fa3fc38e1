"""JSON (de)serialization for every policy kind."""

from __future__ import annotations

import json

from .baselines import ConstrainedPolicy, UnconstrainedPolicy
from .core import Policy
from .direct import LinearPolicy
from .errors import SchemaError
from .indirect import RewardMaxPolicy, ThresholdPolicy

_KINDS = {
    "threshold": ThresholdPolicy,
    "reward-max": RewardMaxPolicy,
    "linear": LinearPolicy,
    "baseline-unconstrained": UnconstrainedPolicy,
    "baseline-constrained": ConstrainedPolicy,
}


def policy_to_dict(policy: Policy) -> dict:
    return policy.to_dict()


def policy_from_dict(d: dict) -> Policy:
    kind = d.get("kind")
    if kind not in _KINDS:
        raise SchemaError(f"unknown policy kind {kind!r}")
    return _KINDS[kind].from_dict(d)


def save_policy(policy: Policy, path) -> None:
    with open(path, "w") as f:
        json.dump(policy_to_dict(policy), f, indent=2, sort_keys=True)


def load_policy(path) -> Policy:
    with open(path) as f:
        return policy_from_dict(json.load(f))


def policy_action_labels(policy: Policy):
    """Action labels a serialized policy was built for, if it records any."""
    actions = getattr(policy, "actions", None)
    if actions is not None:
        return actions.labels
    models = getattr(policy, "models", None)
    if models is not None:
        return tuple(m.action_label for m in models)
    return None
