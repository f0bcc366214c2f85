"""Sublinear-query testers and estimators for rank, stable rank and Schatten norms."""

from ._core import (
    ConfigError,
    EmptyPool,
    ExperimentResult,
    ExperimentSummary,
    FormatError,
    InvalidArgument,
    MatpropError,
    OutOfRange,
    ShapeMismatch,
    TrialRecord,
    Verdict,
    constant_registry,
    distance_to_rank,
    entropy,
    estimate_norm,
    format_matrix,
    generate,
    parse_matrix,
    rank,
    run_experiment,
    schatten_norm,
    singular_values,
    stable_rank,
    test_rank,
    test_rank_sensing,
    test_schatten,
    test_stable_rank,
)

__all__ = [name for name in dir() if not name.startswith("_")]
