"""Trial simulation and survival statistics for ordinal health-state trajectories.

Simulates two-arm oncology trials as monthly ordinal state processes
(CR < PR < SD < PD < Death) and analyzes them three ways: Kaplan-Meier
progression-free survival, Kaplan-Meier overall survival, and a weighted
trajectory test that scores every state move by its magnitude.
"""

from .calibration import (
    CALIBRATION_SEED,
    DEFAULT_TEMPLATE,
    CalibrationError,
    CalibrationTarget,
    calibrate_transition_model,
    control_response_rates,
)
from .config import (
    DEFAULT_POWER_SIZES,
    DEFAULT_TTE_SIZES,
    ConfigError,
    ExperimentConfig,
    default_replicates_for_tte,
    parse_config,
)
from .harness import (
    METHODS,
    ExperimentGrid,
    MethodScan,
    PowerEstimate,
    ReplicateResult,
    SampleSizeEstimate,
    TTEComparison,
    TTESummary,
    compare_tte,
    estimate_power,
    interpolate_sample_size,
    power_rows,
    run_replicates,
    sample_size_rows,
    scan_trial,
    summarize_tte,
    tte_rows,
)
from .kaplan_meier import (
    DegenerateTestError,
    Endpoint,
    KMCurve,
    KMStep,
    TestResult,
    TimeToEventRecord,
    derive_endpoint,
    km_estimate,
    logrank_test,
)
from .seeds import mix64, mix64_array, splitmix64
from .serialize import (
    load_profile,
    read_trajectories_csv,
    save_profile,
    write_km_curve_csv,
    write_power_csv,
    write_sample_size_csv,
    write_tests_csv,
    write_trajectories_csv,
    write_tte_csv,
)
from .trajectories import (
    CR,
    DEATH,
    MAX_STATE,
    PD,
    PR,
    SD,
    Arm,
    SimulatedTrial,
    SubjectTrajectory,
    TransitionModel,
    TrialConfig,
    apply_hazard_ratio,
    best_overall_response,
    simulate_subject,
    simulate_trial,
)
from .weighted import (
    TrajectoryCurve,
    TrajectoryStep,
    WeightedEvent,
    WeightedEventTable,
    cwta_curve,
    extract_weighted_events,
    weighted_logrank_test,
)

__version__ = "0.1.0"

__all__ = [
    "Arm",
    "CALIBRATION_SEED",
    "CR",
    "CalibrationError",
    "CalibrationTarget",
    "ConfigError",
    "DEATH",
    "DEFAULT_POWER_SIZES",
    "DEFAULT_TEMPLATE",
    "DEFAULT_TTE_SIZES",
    "DegenerateTestError",
    "Endpoint",
    "ExperimentConfig",
    "ExperimentGrid",
    "KMCurve",
    "KMStep",
    "MAX_STATE",
    "METHODS",
    "MethodScan",
    "PD",
    "PR",
    "PowerEstimate",
    "ReplicateResult",
    "SD",
    "SampleSizeEstimate",
    "SimulatedTrial",
    "SubjectTrajectory",
    "TTEComparison",
    "TTESummary",
    "TestResult",
    "TimeToEventRecord",
    "TrajectoryCurve",
    "TrajectoryStep",
    "TransitionModel",
    "TrialConfig",
    "WeightedEvent",
    "WeightedEventTable",
    "apply_hazard_ratio",
    "best_overall_response",
    "calibrate_transition_model",
    "compare_tte",
    "control_response_rates",
    "cwta_curve",
    "default_replicates_for_tte",
    "derive_endpoint",
    "estimate_power",
    "extract_weighted_events",
    "interpolate_sample_size",
    "km_estimate",
    "load_profile",
    "logrank_test",
    "mix64",
    "mix64_array",
    "parse_config",
    "power_rows",
    "read_trajectories_csv",
    "run_replicates",
    "sample_size_rows",
    "save_profile",
    "scan_trial",
    "simulate_subject",
    "simulate_trial",
    "splitmix64",
    "summarize_tte",
    "tte_rows",
    "weighted_logrank_test",
    "write_km_curve_csv",
    "write_power_csv",
    "write_sample_size_csv",
    "write_tests_csv",
    "write_trajectories_csv",
    "write_tte_csv",
]
