"""Residual-correlation analysis and weight optimization for test-time augmentation."""

__version__ = "0.1.0"

from .core import (
    DecompositionReport,
    GammaMatrix,
    PredictionSet,
    WeightVector,
    combine,
    decompose,
    direct_risk,
    estimate_gamma,
    per_augmentation_error,
    uniform_weights,
    weighted_risk,
)
from .errors import (
    DimensionMismatch,
    EmptyFile,
    InvalidInput,
    MissingColumn,
    NonConvergence,
    NonNumericCell,
    PredictionFileError,
    RaggedRows,
    SingularGamma,
    TTALabError,
    UnexpectedColumn,
)
from .io import load_predictions, write_predictions
from .optimizer import (
    SolverOptions,
    SolverReport,
    condition_diagnostics,
    solve,
    solve_closed_form,
    solve_projected,
    uniform_risk,
)
from .pruning import PruneDecision, greedy_prune, prune_check
from .simulator import (
    SimulationConfig,
    TrialOutcome,
    fig1_config_search,
    fig1_experiment,
    generate_correlated_errors,
    verify_consistency,
    verify_theorem1,
    verify_theorem2,
)
