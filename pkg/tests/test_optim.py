import numpy as np
import pytest

from policyfrontier import EarlyStopRule, OptimizerConfig, check_gradient, minimize
from policyfrontier.errors import ConfigError, DivergenceError


def quadratic(w):
    return float(w @ w), 2 * w


def shifted_quadratic(w):
    # (w - 3)^2
    return float((w[0] - 3) ** 2), np.array([2 * (w[0] - 3)])


class TestMinimize:
    def test_contracts_to_minimum(self):
        cfg = OptimizerConfig(method="gd", learning_rate=0.4, max_epochs=100)
        w, _ = minimize(quadratic, np.array([5.0]), cfg)
        assert abs(w[0]) < 1e-3

    def test_l2_stationary_point(self):
        # (w-3)^2 + w^2 has minimum at w = 1.5
        cfg = OptimizerConfig(
            method="gd", learning_rate=0.2, l2_penalty=1.0, max_epochs=200
        )
        w, _ = minimize(shifted_quadratic, np.array([0.0]), cfg)
        assert w[0] == pytest.approx(1.5, abs=1e-3)

    def test_loss_trace_non_increasing_full_batch(self):
        cfg = OptimizerConfig(method="gd", learning_rate=0.1, max_epochs=50)
        _, trace = minimize(quadratic, np.array([4.0, -2.0]), cfg)
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))

    def test_early_stop_patience_zero_keeps_best(self):
        # metric degrades from epoch 2 onward; epoch-1 parameters must win
        cfg = OptimizerConfig(method="gd", learning_rate=0.1, max_epochs=10)
        seen = []

        def metric(w):
            seen.append(w.copy())
            return [1.0, 0.5, 0.4, 0.3][len(seen) - 1] if len(seen) <= 4 else 0.0

        stop = EarlyStopRule(patience=0, mode="maximize")
        w, trace = minimize(quadratic, np.array([4.0]), cfg, stop=stop, eval_fn=metric)
        assert len(trace) == 2  # stopped right after the first degradation
        np.testing.assert_array_equal(w, seen[0])

    def test_early_stop_returns_best_not_last(self):
        cfg = OptimizerConfig(method="gd", learning_rate=0.1, max_epochs=6)
        metrics = iter([1.0, 3.0, 2.0, 2.5, 2.0, 1.0])
        snaps = []

        def metric(w):
            snaps.append(w.copy())
            return next(metrics)

        stop = EarlyStopRule(patience=10, mode="maximize")
        w, _ = minimize(quadratic, np.array([4.0]), cfg, stop=stop, eval_fn=metric)
        np.testing.assert_array_equal(w, snaps[1])

    def test_divergence_reports_epoch(self):
        def bad(w):
            return np.inf, w

        cfg = OptimizerConfig(method="gd", learning_rate=0.1, max_epochs=5)
        with pytest.raises(DivergenceError) as exc:
            minimize(bad, np.array([1.0]), cfg)
        assert exc.value.epoch == 0

    def test_seed_reproducibility_minibatch(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((40, 3))
        y = rng.standard_normal(40)

        def obj(w, idx):
            r = X[idx] @ w - y[idx]
            return float(r @ r) / len(idx), 2 * X[idx].T @ r / len(idx)

        cfg = OptimizerConfig(learning_rate=0.05, max_epochs=20, batch_size=8, seed=11)
        w1, t1 = minimize(obj, np.zeros(3), cfg, n_samples=40)
        w2, t2 = minimize(obj, np.zeros(3), cfg, n_samples=40)
        np.testing.assert_array_equal(w1, w2)
        assert t1 == t2

    def test_adam_reaches_quadratic_minimum(self):
        cfg = OptimizerConfig(method="adam", learning_rate=0.3, max_epochs=300)
        w, _ = minimize(quadratic, np.array([5.0, -5.0]), cfg)
        assert np.abs(w).max() < 1e-3

    def test_both_penalties_rejected(self):
        with pytest.raises(ConfigError):
            OptimizerConfig(l1_penalty=0.1, l2_penalty=0.1)

    def test_penalty_mask_exempts_intercept(self):
        # pure penalty objective: masked coordinate should not shrink
        def zero(w):
            return 0.0, np.zeros_like(w)

        cfg = OptimizerConfig(
            method="gd", learning_rate=0.1, l2_penalty=1.0, max_epochs=50
        )
        w, _ = minimize(
            zero, np.array([2.0, 2.0]), cfg, penalize=np.array([1.0, 0.0])
        )
        assert abs(w[0]) < 1e-3
        assert w[1] == pytest.approx(2.0)


class TestCheckGradient:
    def test_quadratic_exact(self):
        err = check_gradient(quadratic, np.array([1.0, -2.0, 3.0]), step=1e-5)
        assert err < 1e-6

    def test_corrupted_gradient_flagged(self):
        def corrupted(w):
            return float(w @ w), 4 * w  # gradient doubled

        err = check_gradient(corrupted, np.array([1.0, 2.0]), step=1e-5)
        assert err == pytest.approx(0.5, abs=1e-4)

    def test_l2_penalty_gradient(self):
        # wrapper reproducing the penalty minimize() adds, intercept exempt
        mask = np.array([1.0, 1.0, 0.0])
        lam = 0.37

        def penalized(w):
            base, g = quadratic(w)
            wp = w * mask
            return base + lam * float(wp @ wp), g + 2 * lam * wp

        err = check_gradient(penalized, np.array([0.7, -1.2, 2.0]), step=1e-5)
        assert err < 1e-6
