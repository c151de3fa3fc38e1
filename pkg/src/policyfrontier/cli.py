"""Command-line entry point for reproducible experiment runs.

Subcommands: synth-gen, train, eval, frontier, defer-sweep, baseline.
Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .baselines import ConstrainedPolicy, UnconstrainedPolicy, calibrate_costs
from .core import ActionSet, Cohort, RewardSpec, load_cohort, save_cohort
from .direct import train_direct
from .errors import (
    CalibrationError,
    ConfigError,
    DataError,
    DivergenceError,
    PolicyFrontierError,
    SchemaError,
)
from .evaluation import (
    FrontierPoint,
    assemble_frontier,
    decision_cohort_analysis,
    doctor_eval,
    evaluate_policy,
    frontier_to_csv,
)
from .indirect import (
    DEFAULT_BUDGETS,
    DEFAULT_OMEGAS,
    BudgetGrid,
    ThresholdGrid,
    search_thresholds,
    sweep_omega,
)
from .optim import EarlyStopRule, OptimizerConfig
from .outcome_models import TuningPlan, fit_outcome_models
from .serialize import load_policy, policy_action_labels, save_policy
from .synthetic import ClinicianSim, SyntheticSpec, bayes_policy, generate, probe_marginals, simulate_clinician


DEFAULT_LAMBDA_GRID = tuple(np.round(np.linspace(0.0, 0.10, 21), 4))


def child_seed(master: int, *tags) -> int:
    """Deterministic per-component seed derived from the master seed."""
    digest = hashlib.sha256(f"{master}:{tags}".encode()).hexdigest()
    return int(digest[:8], 16)


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


@dataclass
class ExperimentConfig:
    raw: dict

    def __post_init__(self):
        if not isinstance(self.raw, dict):
            raise ConfigError("config must be a JSON object")

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        with open(p) as f:
            return cls(json.load(f))

    def hash(self) -> str:
        return config_hash(self.raw)

    def actions(self) -> ActionSet:
        if "actions" not in self.raw:
            raise ConfigError("config missing 'actions'")
        return ActionSet.from_dict(self.raw["actions"])

    def cohort(self, key: str, actions: ActionSet) -> Cohort:
        path = self.raw.get(key)
        if not path:
            raise ConfigError(f"config missing '{key}'")
        if not Path(path).exists():
            raise DataError(f"{key} file not found: {path}")
        return load_cohort(path, actions)

    def seed(self, override: Optional[int]) -> int:
        return int(override if override is not None else self.raw.get("seed", 0))

    def tuning_plan(self, seed: int) -> TuningPlan:
        t = dict(self.raw.get("tuning", {}))
        grid = t.get("penalty_grid")
        kwargs = {
            "n_splits": t.get("n_splits", 20),
            "val_fraction": t.get("val_fraction", 0.30),
            "seed": child_seed(seed, "tuning"),
        }
        if grid:
            kwargs["penalty_grid"] = tuple((g[0], float(g[1])) for g in grid)
        return TuningPlan(**kwargs)

    def optimizer(self, seed: int, which: str = "optimizer") -> OptimizerConfig:
        o = dict(self.raw.get(which, {}))
        return OptimizerConfig(
            method=o.get("method", "adam"),
            learning_rate=o.get("learning_rate", 1e-4),
            l2_penalty=o.get("l2_penalty", 3e-3),
            l1_penalty=o.get("l1_penalty", 0.0),
            max_epochs=o.get("max_epochs", 50),
            batch_size=o.get("batch_size"),
            seed=child_seed(seed, which),
        )

    def omega_grid(self):
        grid = self.raw.get("omega_grid", list(DEFAULT_OMEGAS))
        if not grid:
            raise ConfigError("omega_grid must be non-empty")
        return [float(w) for w in grid]

    def budget_grid(self) -> BudgetGrid:
        grid = self.raw.get("budget_grid", list(DEFAULT_BUDGETS))
        if not grid:
            raise ConfigError("budget_grid must be non-empty")
        return BudgetGrid(tuple(grid))

    def lambda_grid(self):
        grid = self.raw.get("lambda_defer_grid", list(DEFAULT_LAMBDA_GRID))
        if not grid:
            raise ConfigError("lambda_defer_grid must be non-empty")
        out = []
        for lam in grid:
            lam = float(lam)
            if lam not in out:
                out.append(lam)
        return out

    def threshold_grid(self) -> ThresholdGrid:
        kwargs = {}
        if "fnr_levels" in self.raw:
            kwargs["fnr_levels"] = tuple(float(x) for x in self.raw["fnr_levels"])
        if "tie_groups" in self.raw:
            kwargs["tie_groups"] = tuple(tuple(g) for g in self.raw["tie_groups"])
        return ThresholdGrid(**kwargs)

    def methods(self):
        methods = self.raw.get("methods", ["thresholding", "reward-max", "direct"])
        if not methods:
            raise ConfigError("method list must be non-empty")
        known = {"thresholding", "reward-max", "direct", "baseline"}
        for m in methods:
            if m not in known:
                raise ConfigError(f"unknown method {m!r}")
        return methods

    def n_bootstrap(self) -> int:
        return int(self.raw.get("n_bootstrap", 20))


def _out_dir(args, cfg: ExperimentConfig) -> Path:
    if args.out:
        out = Path(args.out)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        out = Path(cfg.raw.get("out_dir", "runs")) / stamp
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict, cfg: ExperimentConfig, seed: int):
    payload = dict(payload)
    payload["config_hash"] = cfg.hash()
    payload["seed"] = seed
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)


def _csv_preamble(cfg: ExperimentConfig, seed: int) -> str:
    return f"# config_hash={cfg.hash()} seed={seed}\n"


def _train_val_split(cohort: Cohort, seed: int, val_fraction: float = 0.3):
    rng = np.random.default_rng(child_seed(seed, "train-val"))
    perm = rng.permutation(cohort.n)
    n_val = max(1, int(round(val_fraction * cohort.n)))
    return cohort.subset(perm[n_val:]), cohort.subset(perm[:n_val])


def cmd_synth_gen(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    seed = cfg.seed(args.seed)
    out = _out_dir(args, cfg)
    synth = cfg.raw.get("synthetic", {})
    spec_dict = synth.get("spec")
    spec = SyntheticSpec.from_dict(spec_dict) if spec_dict else SyntheticSpec()
    n = int(synth.get("n", 100_000))
    marginals = probe_marginals(spec)
    cohort = generate(spec, n, seed=child_seed(seed, "synth-gen"))
    actions = spec.action_set()
    clinician = synth.get("clinician")
    if clinician:
        sim = ClinicianSim(
            rule=bayes_policy,
            noise_rate=float(clinician.get("noise_rate", 0.0)),
            seed=child_seed(seed, "clinician"),
        )
        cohort = simulate_clinician(sim, cohort)
    save_cohort(cohort, actions, out / "cohort.csv")
    _write_json(
        out / "cohort_spec.json",
        {"spec": spec.to_dict(), "n": n, "probe_marginals": list(marginals),
         "actions": actions.to_dict()},
        cfg, seed,
    )
    print(f"wrote {out / 'cohort.csv'}")
    return 0


def _fit_models(cfg, train, actions, seed):
    plan = cfg.tuning_plan(seed)
    opt = cfg.optimizer(seed, "model_optimizer") if "model_optimizer" in cfg.raw \
        else cfg.optimizer(seed)
    return fit_outcome_models(train, actions, plan, opt), plan


def cmd_train(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    seed = cfg.seed(args.seed)
    out = _out_dir(args, cfg)
    actions = cfg.actions()
    train = cfg.cohort("train_csv", actions)
    method = cfg.raw.get("method", "direct")
    if method == "direct":
        spec = RewardSpec(
            omega=float(cfg.raw.get("omega", 0.9)),
            lambda_defer=float(cfg.raw.get("lambda_defer", 0.0)),
        )
        tr, val = _train_val_split(train, seed)
        stop = EarlyStopRule(patience=int(cfg.raw.get("patience", 5)))
        policy = train_direct(tr, actions, spec, cfg.optimizer(seed), stop, val)
    elif method == "reward-max":
        models, _ = _fit_models(cfg, train, actions, seed)
        policy = sweep_omega(models, [float(cfg.raw.get("omega", 0.9))], actions)[0]
    elif method == "thresholding":
        models, plan = _fit_models(cfg, train, actions, seed)
        budget = float(cfg.raw.get("budget", 1.0))
        val_cohorts = [train.subset(v) for _, v in plan.splits(train.n)]
        per_budget = search_thresholds(
            models, cfg.threshold_grid(), val_cohorts,
            BudgetGrid((budget,)), train=train, actions=actions,
        )
        policy = per_budget[budget]
    else:
        raise ConfigError(f"cannot train method {method!r}")
    save_policy(policy, out / "policy.json")
    print(f"wrote {out / 'policy.json'}")
    return 0


def cmd_eval(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    seed = cfg.seed(args.seed)
    out = _out_dir(args, cfg)
    actions = cfg.actions()
    cohort = cfg.cohort("test_csv", actions)
    policy_path = cfg.raw.get("policy_path")
    if not policy_path:
        raise ConfigError("config missing 'policy_path'")
    if not Path(policy_path).exists():
        raise DataError(f"policy file not found: {policy_path}")
    policy = load_policy(policy_path)
    labels = policy_action_labels(policy)
    if labels is not None and tuple(labels) != actions.labels:
        raise SchemaError(
            f"policy action labels {labels} differ from cohort schema {actions.labels}"
        )
    ev = evaluate_policy(
        policy, cohort, actions, n_bootstrap=cfg.n_bootstrap(),
        seed=child_seed(seed, "eval"),
    )
    _write_json(out / "eval.json", {"eval": ev.to_dict()}, cfg, seed)
    print(f"wrote {out / 'eval.json'}")
    return 0


def _baseline_points(cfg, models, train, test, actions, seed):
    points = []
    unc = UnconstrainedPolicy(tuple(models))
    points.append(
        FrontierPoint(
            "baseline", None,
            evaluate_policy(unc, test, actions, cfg.n_bootstrap(),
                            child_seed(seed, "eval", "baseline-unc")),
            "baseline-unconstrained",
        )
    )
    if train.doctor_action is not None:
        costs = calibrate_costs(models, train)
        con = ConstrainedPolicy(tuple(models), costs)
        points.append(
            FrontierPoint(
                "baseline", None,
                evaluate_policy(con, test, actions, cfg.n_bootstrap(),
                                child_seed(seed, "eval", "baseline-con")),
                "baseline-constrained",
            )
        )
    return points, unc


def cmd_frontier(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    seed = cfg.seed(args.seed)
    out = _out_dir(args, cfg)
    actions = cfg.actions()
    train = cfg.cohort("train_csv", actions)
    test = cfg.cohort("test_csv", actions)
    methods = cfg.methods()
    n_boot = cfg.n_bootstrap()
    policies_dir = out / "policies"
    policies_dir.mkdir(exist_ok=True)

    points = []
    models = None
    plan = None
    if {"thresholding", "reward-max", "baseline"} & set(methods):
        models, plan = _fit_models(cfg, train, actions, seed)

    if "thresholding" in methods:
        val_cohorts = [train.subset(v) for _, v in plan.splits(train.n)]
        per_budget = search_thresholds(
            models, cfg.threshold_grid(), val_cohorts, cfg.budget_grid(),
            train=train, actions=actions,
        )
        for b, policy in per_budget.items():
            ref = f"policies/thresholding_b{b:.4g}.json"
            save_policy(policy, out / ref)
            ev = evaluate_policy(policy, test, actions, n_boot,
                                 child_seed(seed, "eval", "thresholding", b))
            points.append(FrontierPoint("thresholding", b, ev, ref))

    if "reward-max" in methods:
        for policy in sweep_omega(models, cfg.omega_grid(), actions):
            ref = f"policies/reward-max_w{policy.omega:.4g}.json"
            save_policy(policy, out / ref)
            ev = evaluate_policy(policy, test, actions, n_boot,
                                 child_seed(seed, "eval", "reward-max", policy.omega))
            points.append(FrontierPoint("reward-max", policy.omega, ev, ref))

    if "direct" in methods:
        tr, val = _train_val_split(train, seed)
        stop = EarlyStopRule(patience=int(cfg.raw.get("patience", 5)))
        for omega in cfg.omega_grid():
            opt = cfg.optimizer(child_seed(seed, "direct", omega))
            policy = train_direct(tr, actions, RewardSpec(omega), opt, stop, val)
            ref = f"policies/direct_w{omega:.4g}.json"
            save_policy(policy, out / ref)
            ev = evaluate_policy(policy, test, actions, n_boot,
                                 child_seed(seed, "eval", "direct", omega))
            points.append(FrontierPoint("direct", omega, ev, ref))

    if "baseline" in methods:
        baseline_pts, _ = _baseline_points(cfg, models, train, test, actions, seed)
        points.extend(baseline_pts)

    if test.doctor_action is not None:
        points.append(
            FrontierPoint(
                "doctor", None,
                doctor_eval(test, actions, n_boot, child_seed(seed, "eval", "doctor")),
            )
        )

    report = assemble_frontier(points)
    csv_text = _csv_preamble(cfg, seed) + frontier_to_csv(report)
    (out / "frontier.csv").write_text(csv_text)
    _write_json(
        out / "frontier.json",
        {
            "points": [
                {
                    "method": p.method,
                    "param": p.param,
                    "eval": p.eval.to_dict(),
                    "policy_ref": p.policy_ref,
                    "dominated": bool(d),
                }
                for p, d in report.rows
            ],
            "manifest": {"version": __version__, "numpy": np.__version__,
                         "methods": methods},
        },
        cfg, seed,
    )
    print(f"wrote {out / 'frontier.csv'}")
    return 0


def cmd_defer_sweep(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    seed = cfg.seed(args.seed)
    out = _out_dir(args, cfg)
    actions = cfg.actions()
    train = cfg.cohort("train_csv", actions)
    test = cfg.cohort("test_csv", actions)
    if train.doctor_action is None or test.doctor_action is None:
        raise ConfigError("defer-sweep requires doctor_action in both cohorts")
    omega = float(cfg.raw.get("defer_omega", 0.92))
    trials = int(cfg.raw.get("defer_trials", 5))
    stop = EarlyStopRule(patience=int(cfg.raw.get("patience", 5)))

    lines = [
        "lambda_defer,defer_rate,n_decided,policy_iat,doctor_iat,"
        "policy_cost,doctor_cost"
    ]
    for lam in cfg.lambda_grid():
        rows = []
        for trial in range(trials):
            tr, val = _train_val_split(train, child_seed(seed, "defer", lam, trial))
            opt = cfg.optimizer(child_seed(seed, "defer-opt", lam, trial))
            policy = train_direct(tr, actions, RewardSpec(omega, lam), opt, stop, val)
            if policy.has_defer:
                rep = decision_cohort_analysis(policy, test, actions)
                if rep.empty:
                    rows.append((rep.defer_rate, 0, np.nan, np.nan, np.nan, np.nan))
                else:
                    rows.append((
                        rep.defer_rate, rep.n_decided,
                        rep.policy_eval.iat_rate, rep.doctor_eval.iat_rate,
                        rep.policy_eval.cost_rate, rep.doctor_eval.cost_rate,
                    ))
            else:
                # lambda 0: no defer column; full-cohort comparison
                ev = evaluate_policy(policy, test, actions, n_bootstrap=0)
                doc = doctor_eval(test, actions, n_bootstrap=0)
                rows.append((0.0, test.n, ev.iat_rate, doc.iat_rate,
                             ev.cost_rate, doc.cost_rate))
        arr = np.array(rows, dtype=float)
        with np.errstate(invalid="ignore"):
            mean = np.nanmean(arr, axis=0)
        lines.append(
            f"{lam:.6g},{mean[0]:.6f},{mean[1]:.1f},{mean[2]:.6f},"
            f"{mean[3]:.6f},{mean[4]:.6f},{mean[5]:.6f}"
        )
    (out / "defer_sweep.csv").write_text(
        _csv_preamble(cfg, seed) + "\n".join(lines) + "\n"
    )
    print(f"wrote {out / 'defer_sweep.csv'}")
    return 0


def cmd_baseline(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    seed = cfg.seed(args.seed)
    out = _out_dir(args, cfg)
    actions = cfg.actions()
    train = cfg.cohort("train_csv", actions)
    test = cfg.cohort("test_csv", actions)
    models, _ = _fit_models(cfg, train, actions, seed)
    points, unc = _baseline_points(cfg, models, train, test, actions, seed)
    payload = {
        "baselines": [
            {"policy_ref": p.policy_ref, "eval": p.eval.to_dict()} for p in points
        ]
    }
    _write_json(out / "baseline.json", payload, cfg, seed)
    print(f"wrote {out / 'baseline.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="policyfrontier",
        description="Learn and evaluate sets of treatment policies trading off "
        "effectiveness against 2nd-line usage.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in [
        ("synth-gen", cmd_synth_gen),
        ("train", cmd_train),
        ("eval", cmd_eval),
        ("frontier", cmd_frontier),
        ("defer-sweep", cmd_defer_sweep),
        ("baseline", cmd_baseline),
    ]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", default=None, help="output directory")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except (SchemaError, DataError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except (DivergenceError, CalibrationError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3
    except PolicyFrontierError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
