"""Hybrid projection (CQ) fixed-point solvers in Euclidean and p-norm geometry."""

from ._hybridcq import (
    BruteForceOptions,
    ConvexSet,
    Error,
    KSchedule,
    MappingSpec,
    SolverConfig,
    SpaceGeometry,
    StepRule,
    ValidationError,
    brute_force_project,
    generalized_project,
    metric_project,
    parse_config,
    run_experiment,
    run_scheme,
    run_selftest,
    trace_csv,
)

__all__ = [
    "BruteForceOptions",
    "ConvexSet",
    "Error",
    "KSchedule",
    "MappingSpec",
    "SolverConfig",
    "SpaceGeometry",
    "StepRule",
    "ValidationError",
    "brute_force_project",
    "generalized_project",
    "metric_project",
    "parse_config",
    "run_experiment",
    "run_scheme",
    "run_selftest",
    "trace_csv",
]
