"""Apprenticeship learning by feature-expectation matching on tabular MDPs."""

__version__ = "0.1.0"

from irlearn.apprentice import (  # noqa: E402
    ApprenticeConfig,
    ApprenticeshipLearner,
    RunResult,
    mix_policies,
    run_apprenticeship,
    select_best,
)
from irlearn.diagnostics import (  # noqa: E402
    certify_run,
    contraction_certificate,
    contraction_ratio_bound,
    projection_update,
    iteration_bound,
)
from irlearn.environments import GridworldSpec, make_expert, make_gridworld, make_random_mdp  # noqa: E402
from irlearn.exceptions import ConfigError, ConvergenceError, MaxIterationsError, NumericalError  # noqa: E402
from irlearn.feature_expectation import (  # noqa: E402
    FeatureExpectation,
    exact_feature_expectation,
    expert_estimate,
    mc_feature_expectation,
    truncation_horizon,
)
from irlearn.max_margin import MarginSolution, min_norm_point, solve_max_margin  # noqa: E402
from irlearn.mdp import (  # noqa: E402
    FeatureMap,
    Mdp,
    MixedPolicy,
    Policy,
    RewardTable,
    Trajectory,
    linear_reward,
    make_rng,
    rollout,
    sample_next_state,
)
from irlearn.quantum_cost import (  # noqa: E402
    CostParams,
    classical_iteration_cost,
    crossover_sweep,
    quantum_iteration_cost,
    subroutine_costs,
)
from irlearn.rl_solver import optimality_gap, policy_iteration, policy_value, solve_eps_optimal  # noqa: E402
