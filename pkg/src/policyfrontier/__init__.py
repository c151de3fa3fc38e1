"""Multi-objective treatment policy learning with fully observed outcomes.

Learners produce *sets* of deterministic policies trading off realized
benefit against usage of costly (2nd-line) actions: probability
thresholding with grid search, expected reward maximization over a
preference sweep, and direct optimization of a reward-weighted softmax
surrogate (optionally with a defer-to-clinician action). A synthetic
environment with a known optimal rule and a Pareto-frontier evaluation
harness round out the package.
"""

__version__ = "0.1.0"

from .core import (
    ActionSet,
    Cohort,
    Policy,
    RewardSpec,
    Standardization,
    apply_policy,
    build_rewards,
    load_cohort,
    save_cohort,
)
from .optim import EarlyStopRule, OptimizerConfig, check_gradient, minimize
from .outcome_models import (
    LogisticModel,
    TuningPlan,
    auc_score,
    fit_outcome_models,
    predict_effectiveness,
    roc_points,
    threshold_for_fnr,
)
from .indirect import (
    BudgetGrid,
    RewardMaxPolicy,
    ThresholdGrid,
    ThresholdPolicy,
    reward_max_decide,
    search_thresholds,
    sweep_omega,
    threshold_decide,
)
from .direct import (
    LinearPolicy,
    calibration_probe,
    convexity_probe,
    regret_transform,
    surrogate_loss_and_grad,
    train_direct,
)
from .baselines import (
    CalibratedCosts,
    ConstrainedPolicy,
    UnconstrainedPolicy,
    calibrate_costs,
    constrained_decide,
    unconstrained_decide,
)
from .synthetic import (
    ClinicianSim,
    SyntheticSpec,
    bayes_policy,
    bayes_value,
    generate,
    simulate_clinician,
)
from .evaluation import (
    DecisionCohortReport,
    FrontierPoint,
    FrontierReport,
    PolicyEval,
    assemble_frontier,
    decision_cohort_analysis,
    doctor_eval,
    dominates,
    evaluate_policy,
    frontier_to_csv,
)
from .serialize import load_policy, policy_from_dict, policy_to_dict, save_policy
