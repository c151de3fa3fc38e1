"""Gradient-based minimization shared by outcome models and the direct learner."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DivergenceError

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "adam"  # "adam" or "gd"
    learning_rate: float = 1e-4
    l2_penalty: float = 0.0
    l1_penalty: float = 0.0
    max_epochs: int = 50
    batch_size: Optional[int] = None  # None = full batch
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("adam", "gd"):
            raise ConfigError(f"unknown optimizer method {self.method!r}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.l2_penalty < 0 or self.l1_penalty < 0:
            raise ConfigError("penalties must be nonnegative")
        if self.l2_penalty > 0 and self.l1_penalty > 0:
            raise ConfigError("at most one of l1/l2 penalty may be nonzero")
        if self.max_epochs <= 0:
            raise ConfigError("max_epochs must be positive")
        if self.batch_size is not None and self.batch_size <= 0:
            raise ConfigError("batch_size must be positive")


@dataclass(frozen=True)
class EarlyStopRule:
    metric: str = "validation-mean-reward"
    patience: int = 0
    mode: str = "maximize"

    def __post_init__(self):
        if self.patience < 0:
            raise ConfigError("patience must be nonnegative")
        if self.mode not in ("maximize", "minimize"):
            raise ConfigError("mode must be 'maximize' or 'minimize'")


def _penalty_value_and_grad(params, config, mask):
    if config.l2_penalty > 0:
        w = params * mask
        return config.l2_penalty * float(np.sum(w * w)), 2.0 * config.l2_penalty * w
    if config.l1_penalty > 0:
        w = params * mask
        # subgradient 0 at the kink
        return config.l1_penalty * float(np.abs(w).sum()), config.l1_penalty * np.sign(w)
    return 0.0, 0.0


def minimize(
    loss_and_grad: Callable,
    init: np.ndarray,
    config: OptimizerConfig,
    stop: Optional[EarlyStopRule] = None,
    eval_fn: Optional[Callable[[np.ndarray], float]] = None,
    penalize: Optional[np.ndarray] = None,
    n_samples: Optional[int] = None,
):
    """Run gradient descent / Adam, returning (best params, per-epoch trace).

    loss_and_grad(params) -> (loss, grad) for full-batch training; with
    config.batch_size set, it is called as loss_and_grad(params, indices)
    and n_samples must be given. Regularization from config is added here,
    masked by `penalize` (True = penalized; default all), so objectives
    stay penalty-free. With an EarlyStopRule and eval_fn, the parameters
    achieving the best metric seen are returned; otherwise the final ones.
    """
    params = np.array(init, dtype=float)
    mask = np.ones_like(params) if penalize is None else np.asarray(penalize, float)
    rng = np.random.default_rng(config.seed)
    if config.batch_size is not None and n_samples is None:
        raise ConfigError("mini-batching requires n_samples")

    if config.method == "adam":
        m = np.zeros_like(params)
        v = np.zeros_like(params)
        t = 0

    use_stop = stop is not None and eval_fn is not None
    best_metric = None
    best_params = params.copy()
    bad_epochs = 0
    trace = []

    for epoch in range(config.max_epochs):
        if config.batch_size is None:
            batches = [None]
        else:
            order = rng.permutation(n_samples)
            batches = np.array_split(
                order, max(1, int(np.ceil(n_samples / config.batch_size)))
            )
        epoch_loss = 0.0
        for batch in batches:
            if batch is None:
                loss, grad = loss_and_grad(params)
            else:
                loss, grad = loss_and_grad(params, batch)
            pen, pen_grad = _penalty_value_and_grad(params, config, mask)
            loss = float(loss) + pen
            grad = np.asarray(grad, dtype=float) + pen_grad
            if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
                raise DivergenceError(
                    f"non-finite loss or gradient at epoch {epoch}", epoch=epoch
                )
            if config.method == "gd":
                params = params - config.learning_rate * grad
            else:
                t += 1
                m = ADAM_BETA1 * m + (1 - ADAM_BETA1) * grad
                v = ADAM_BETA2 * v + (1 - ADAM_BETA2) * grad * grad
                m_hat = m / (1 - ADAM_BETA1**t)
                v_hat = v / (1 - ADAM_BETA2**t)
                params = params - config.learning_rate * m_hat / (
                    np.sqrt(v_hat) + ADAM_EPS
                )
            epoch_loss += loss
        epoch_loss /= len(batches)

        if use_stop:
            metric = float(eval_fn(params))
            trace.append(metric)
            sign = 1.0 if stop.mode == "maximize" else -1.0
            if best_metric is None or sign * metric > sign * best_metric:
                best_metric = metric
                best_params = params.copy()
                bad_epochs = 0
            else:
                bad_epochs += 1
                if bad_epochs > stop.patience:
                    return best_params, trace
        else:
            trace.append(epoch_loss)
            best_params = params

    return best_params, trace


def check_gradient(loss_and_grad: Callable, point: np.ndarray, step: float = 1e-5):
    """Max relative error between the analytic gradient and central differences."""
    point = np.asarray(point, dtype=float)
    _, grad = loss_and_grad(point)
    grad = np.asarray(grad, dtype=float)
    flat = point.ravel()
    num = np.empty_like(flat)
    for i in range(flat.size):
        e = np.zeros_like(flat)
        e[i] = step
        lp, _ = loss_and_grad((flat + e).reshape(point.shape))
        lm, _ = loss_and_grad((flat - e).reshape(point.shape))
        num[i] = (lp - lm) / (2 * step)
    g = grad.ravel()
    rel = np.abs(g - num) / (np.abs(g) + 1e-8)
    return float(rel.max())
