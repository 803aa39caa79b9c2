"""Two-particle Bell-test simulation and analysis toolkit.

Quantum match probabilities with an independent statevector oracle,
exhaustive impossibility checks for local deterministic and stochastic
hidden-variable models, a seeded Monte Carlo experiment harness with a
reject/retain decision rule, and a linear-programming treatment of the
detection loophole.
"""

from .counterfactuals import (
    BELL_PAIRS,
    WITNESS_PATTERN,
    Assignment,
    CounterfactualTable,
    DerivationTrace,
    MPattern,
    Population,
    TraceStep,
    all_tables,
    bell_statistic,
    exists_local_table_with_pattern,
    find_interaction_unit,
    lhv_max_bell_statistic,
    match_indicator,
    theorem1_contradiction_trace,
    theorem1_witness_check,
    violation_margin,
)
from .experiment import (
    BellEstimate,
    ConfigError,
    Decision,
    EstimationError,
    ExperimentConfig,
    TrialRecord,
    decide,
    estimate,
    read_dataset_csv,
    run_experiment,
    write_dataset_csv,
)
from .lhv import (
    DeterministicLhv,
    GridSearchResult,
    StochasticLocalModel,
    lhv_match_table,
    load_model,
    sample_from_lhv,
    save_model,
    stochastic_bell_search,
    stochastic_bell_supremum,
    stochastic_expected_match,
)
from .loophole import (
    AugmentedStrategy,
    FakingLp,
    FakingProblem,
    LpSolution,
    build_faking_lp,
    demonstration_solution,
    enumerate_augmented_strategies,
    max_faking_efficiency,
    sample_loophole_model,
    solve_lp,
)
from .quantum import (
    Angle,
    AngleTriple,
    MatchProbabilityTable,
    TwoQubitState,
    match_probability,
    match_table,
    sample_outcome_pair,
    singlet_match_probabilities,
    singlet_match_probability_oracle,
)
from .rng import SplitMix64, derive_seed
from .simplex import LinearProgram, SimplexError, SimplexResult

__version__ = "0.1.0"

__all__ = [
    "Angle",
    "AngleTriple",
    "Assignment",
    "AugmentedStrategy",
    "BELL_PAIRS",
    "BellEstimate",
    "ConfigError",
    "CounterfactualTable",
    "Decision",
    "DerivationTrace",
    "DeterministicLhv",
    "EstimationError",
    "ExperimentConfig",
    "FakingLp",
    "FakingProblem",
    "GridSearchResult",
    "LinearProgram",
    "LpSolution",
    "MPattern",
    "MatchProbabilityTable",
    "Population",
    "SimplexError",
    "SimplexResult",
    "SplitMix64",
    "StochasticLocalModel",
    "TraceStep",
    "TrialRecord",
    "TwoQubitState",
    "WITNESS_PATTERN",
    "all_tables",
    "bell_statistic",
    "build_faking_lp",
    "decide",
    "demonstration_solution",
    "derive_seed",
    "enumerate_augmented_strategies",
    "estimate",
    "exists_local_table_with_pattern",
    "find_interaction_unit",
    "lhv_match_table",
    "lhv_max_bell_statistic",
    "load_model",
    "match_indicator",
    "match_probability",
    "match_table",
    "max_faking_efficiency",
    "read_dataset_csv",
    "run_experiment",
    "sample_from_lhv",
    "sample_loophole_model",
    "sample_outcome_pair",
    "save_model",
    "singlet_match_probabilities",
    "singlet_match_probability_oracle",
    "solve_lp",
    "stochastic_bell_search",
    "stochastic_bell_supremum",
    "stochastic_expected_match",
    "theorem1_contradiction_trace",
    "theorem1_witness_check",
    "violation_margin",
    "write_dataset_csv",
]
