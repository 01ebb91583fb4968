"""prmplan: stochastic shortest path planning with portfolios of reduced models."""

from .mdp import (
    DeadEndError,
    ModelError,
    Policy,
    SspProblem,
    ValueTable,
    bellman_backup,
    make_distribution,
    reachable_states,
    tabular_problem,
    validate_problem,
)
from .reduction import (
    FULL_MODEL,
    M02,
    MOST_LIKELY,
    ModelSelector,
    OutcomeSelectionPrinciple,
    ReducedModel,
    SelectorError,
    TableSelector,
    UniformSelector,
    ZeroOneSelector,
    build_reduced_model,
    make_01rm_selector,
    select_outcomes,
)
from .risk import (
    RiskPredicate,
    RiskProfile,
    estimate_risk_profile,
    exact_risk_reachability,
    nse_set,
    sample_walks,
)
from .simulator import (
    ExperimentReport,
    ModelResult,
    SimConfig,
    TrialStats,
    run_experiment,
    run_trial,
)
from .solvers import (
    EnumerationCapError,
    NonconvergenceError,
    Solution,
    SolverConfig,
    compute_hmin,
    solve_deterministic,
    solve_lao_star,
    solve_value_iteration,
)

__version__ = "0.1.0"
