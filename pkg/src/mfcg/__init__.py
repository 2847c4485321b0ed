"""Three-timescale tabular Q-learning for mixed cooperative/competitive
mean-field problems, with closed-form benchmark solvers and a reproducible
experiment harness.

Layout:

* :mod:`mfcg.core` — grids, simplex vectors, projection/sampling primitives;
* :mod:`mfcg.rates` — the three learning-rate schedules and their ordering check;
* :mod:`mfcg.envs` — the two benchmark environments (stationary quadratic
  tracking, finite-horizon execution) as grid diffusions;
* :mod:`mfcg.learner` — the stationary and finite-horizon Q-learners;
* :mod:`mfcg.analytic` — closed-form/ODE reference solutions used for scoring;
* :mod:`mfcg.harness` — config ingestion, multi-run orchestration, comparison
  metrics, CSV emission;
* :mod:`mfcg.cli` — the ``mfcg`` command-line entry point.
"""

from .core import (
    Grid,
    argmin_row,
    check_simplex,
    dirac_mix,
    gaussian_on_grid,
    make_rng,
    marginal_means,
    mean_of,
    project_to_grid,
    sample_from,
)
from .errors import (
    ConfigError,
    DegenerateParametersError,
    DimensionError,
    IntegrationError,
    InvalidDistributionError,
    InvalidRateError,
    MfcgError,
    UnsupportedParametersError,
)
from .rates import (
    RateExponents,
    rho_episode,
    rho_q_finite,
    rho_q_infinite,
    validate_exponents,
)
from .envs import (
    AsymptoticLQEnv,
    GridDiffusionEnv,
    LQCostParams,
    TraderCostParams,
    TraderEnv,
    env_reset,
    env_step,
    mean_action_of,
)
from .analytic import (
    RiccatiGap,
    RiccatiPath,
    StationaryQuadraticSolution,
    TraderSolution,
    asymptotic_theory_distribution,
    riccati_limit_gap,
    solve_asymptotic_lq,
    solve_finite_player_riccati,
    solve_trader,
    trader_theory_distribution,
)
from .learner import (
    FiniteHorizonQLearner,
    InfiniteHorizonQLearner,
    StopRule,
    epsilon_greedy,
    q_update_finite,
    q_update_infinite,
    run_episode_finite,
    run_episode_infinite,
)
from .harness import (
    ComparisonReport,
    ExperimentConfig,
    ExperimentResults,
    compare_to_theory,
    emit_csv,
    load_config,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "argmin_row",
    "check_simplex",
    "dirac_mix",
    "gaussian_on_grid",
    "make_rng",
    "marginal_means",
    "mean_of",
    "project_to_grid",
    "sample_from",
    "MfcgError",
    "ConfigError",
    "DimensionError",
    "InvalidDistributionError",
    "InvalidRateError",
    "DegenerateParametersError",
    "UnsupportedParametersError",
    "IntegrationError",
    "RateExponents",
    "rho_episode",
    "rho_q_finite",
    "rho_q_infinite",
    "validate_exponents",
    "GridDiffusionEnv",
    "AsymptoticLQEnv",
    "TraderEnv",
    "LQCostParams",
    "TraderCostParams",
    "env_reset",
    "env_step",
    "mean_action_of",
    "StationaryQuadraticSolution",
    "TraderSolution",
    "RiccatiPath",
    "RiccatiGap",
    "solve_asymptotic_lq",
    "solve_trader",
    "solve_finite_player_riccati",
    "riccati_limit_gap",
    "asymptotic_theory_distribution",
    "trader_theory_distribution",
    "InfiniteHorizonQLearner",
    "FiniteHorizonQLearner",
    "StopRule",
    "epsilon_greedy",
    "q_update_infinite",
    "q_update_finite",
    "run_episode_infinite",
    "run_episode_finite",
    "ExperimentConfig",
    "ExperimentResults",
    "ComparisonReport",
    "load_config",
    "run_experiment",
    "compare_to_theory",
    "emit_csv",
    "__version__",
]
