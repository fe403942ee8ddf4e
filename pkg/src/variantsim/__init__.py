"""Simulation and analysis of services with runtime-switchable variants.

The package models a service as a single-server FIFO queue whose variant
(algorithm, parameters, auxiliary data) can be swapped live by a controller
watching the queue length. It bundles the closed-form queue math behind the
switching threshold, a deterministic discrete-event simulator, rank
correlation analytics, and a regression-tree execution-time profiler.
"""

from .model import (
    AdaptationDimensions,
    LognormalNoise,
    MicroserviceSpec,
    ParameterRange,
    ParameterValues,
    ServiceChainSpec,
    ServiceVariant,
    ValidationIssue,
    ValidationReport,
    VariantProfile,
    enumerate_variants,
    ms,
    seconds,
    validate_spec,
)
from .queueing import (
    QueueParams,
    ThresholdResult,
    average_wait,
    dampened_threshold,
    is_stable,
    switch_threshold,
    utilization,
    waiting_time,
)
from .policy import (
    PolicyOptions,
    RecoveryOptions,
    SelectionResult,
    SwitchDecision,
    SwitchReason,
    SwitchingPolicy,
    select_variant,
    should_switch,
)
from .simulator import (
    ArrivalSpec,
    QueueSample,
    RequestRecord,
    ScenarioConfig,
    ScenarioValidationError,
    ServiceStats,
    SimulationTrace,
    StageRecord,
    SwitchEvent,
    generate_arrivals,
    replay_check,
    run_scenario,
    validate_scenario,
)
from .analysis import (
    CorrelationMatrix,
    ObservationTable,
    ViolationStats,
    correlation_matrix,
    export_csv,
    export_long_format,
    kendall_tau,
    read_table_csv,
    read_trace_table,
    violation_stats,
)
from .profiler import (
    EvaluationResult,
    Hyperparams,
    ProfileDataset,
    RegressionTreeModel,
    feature_importance,
    fit,
    make_dataset,
    predict,
    predict_one,
    r2_score,
    read_dataset_csv,
    train_test_evaluate,
    write_dataset_csv,
)
from .config import SCHEMA_VERSION, ScenarioError, load_scenario, parse_scenario

__version__ = "0.1.0"

__all__ = [
    "AdaptationDimensions",
    "ArrivalSpec",
    "CorrelationMatrix",
    "EvaluationResult",
    "Hyperparams",
    "LognormalNoise",
    "MicroserviceSpec",
    "ObservationTable",
    "ParameterRange",
    "ParameterValues",
    "PolicyOptions",
    "ProfileDataset",
    "QueueParams",
    "QueueSample",
    "RecoveryOptions",
    "RegressionTreeModel",
    "RequestRecord",
    "ScenarioConfig",
    "ScenarioError",
    "ScenarioValidationError",
    "SCHEMA_VERSION",
    "SelectionResult",
    "ServiceChainSpec",
    "ServiceStats",
    "ServiceVariant",
    "SimulationTrace",
    "StageRecord",
    "SwitchDecision",
    "SwitchEvent",
    "SwitchReason",
    "SwitchingPolicy",
    "ThresholdResult",
    "ValidationIssue",
    "ValidationReport",
    "VariantProfile",
    "ViolationStats",
    "average_wait",
    "correlation_matrix",
    "dampened_threshold",
    "enumerate_variants",
    "export_csv",
    "export_long_format",
    "feature_importance",
    "fit",
    "generate_arrivals",
    "is_stable",
    "kendall_tau",
    "load_scenario",
    "make_dataset",
    "ms",
    "parse_scenario",
    "predict",
    "predict_one",
    "r2_score",
    "read_dataset_csv",
    "read_table_csv",
    "read_trace_table",
    "replay_check",
    "run_scenario",
    "seconds",
    "select_variant",
    "should_switch",
    "switch_threshold",
    "train_test_evaluate",
    "utilization",
    "validate_scenario",
    "validate_spec",
    "violation_stats",
    "waiting_time",
    "write_dataset_csv",
]
