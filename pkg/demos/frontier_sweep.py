"""Build a benefit/cost Pareto frontier from three policy families.

We simulate a 4-action cohort (two cheap 1st-line actions, two costly
2nd-line actions) plus a noisy clinician, then sweep:

  * thresholding        — per-action probability cutoffs searched over an
                          FNR-level grid under a family of 2nd-line budgets
  * reward maximization — argmax of omega * P(effective) + (1-omega) * (1-cost)
                          over a grid of preference weights
  * direct optimization — linear policies trained on the reward-weighted
                          softmax surrogate for a few omega values

and print the pooled frontier against the clinician's operating point.

Run:  python3 demos/frontier_sweep.py
"""

import numpy as np

from policyfrontier import (
    ActionSet,
    BudgetGrid,
    Cohort,
    FrontierPoint,
    OptimizerConfig,
    RewardSpec,
    ThresholdGrid,
    TuningPlan,
    assemble_frontier,
    doctor_eval,
    evaluate_policy,
    fit_outcome_models,
    frontier_to_csv,
    search_thresholds,
    sweep_omega,
    train_direct,
)
from policyfrontier.synthetic import ClinicianSim, simulate_clinician

rng = np.random.default_rng(7)
actions = ActionSet(("NIT", "SXT", "CIP", "LVX"), (0, 0, 1, 1))


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def make_cohort(n, seed):
    r = np.random.default_rng(seed)
    X = r.standard_normal((n, 4))
    # each action is mostly effective; its own feature shifts the odds
    probs = sigmoid(np.array([1.6, 1.0, 2.2, 2.2]) + 2.0 * X)
    Y = (r.random((n, 4)) < probs).astype(int)
    return Cohort(X, Y, tuple(range(n)), ("x0", "x1", "x2", "x3"))


train = make_cohort(2000, seed=1)
test = make_cohort(4000, seed=2)
sim = ClinicianSim(
    rule=lambda X: np.argmax(X, axis=1), noise_rate=0.8, seed=3, n_actions=4
)
test = simulate_clinician(sim, test)

plan = TuningPlan(n_splits=3, penalty_grid=(("l2", 1e-2),), seed=0)
opt = OptimizerConfig(method="adam", learning_rate=0.1, max_epochs=200)
models = fit_outcome_models(train, actions, plan, opt)

points = []

per_budget = search_thresholds(
    models,
    ThresholdGrid(fnr_levels=(0.0, 0.25, 0.5, 1.0)),
    train,
    BudgetGrid((0.1, 0.25, 0.5, 1.0)),
    train=train,
    actions=actions,
)
for b, pol in per_budget.items():
    points.append(
        FrontierPoint("thresholding", b, evaluate_policy(pol, test, actions))
    )

for pol in sweep_omega(models, (0.85, 0.9, 0.95, 1.0), actions):
    points.append(
        FrontierPoint("reward-max", pol.omega, evaluate_policy(pol, test, actions))
    )

direct_opt = OptimizerConfig(
    method="adam", learning_rate=0.1, l2_penalty=1e-3, max_epochs=1500
)
for omega in (0.9, 1.0):
    pol = train_direct(train, actions, RewardSpec(omega), direct_opt)
    points.append(
        FrontierPoint("direct", omega, evaluate_policy(pol, test, actions))
    )

points.append(FrontierPoint("doctor", None, doctor_eval(test, actions)))

report = assemble_frontier(points)
print(frontier_to_csv(report))

doc = points[-1].eval
best = [
    p for p in report.non_dominated()
    if p.method != "doctor"
    and p.eval.iat_rate <= doc.iat_rate
    and p.eval.cost_rate <= doc.cost_rate
]
print(
    f"{len(best)} learned frontier points weakly dominate the clinician "
    f"(iat={doc.iat_rate:.3f}, cost={doc.cost_rate:.3f})."
)
