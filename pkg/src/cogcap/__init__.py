"""Effective capacity of cognitive-radio links under statistical QoS
constraints.

The package covers the full pipeline: energy-detector operating
characteristics, the eight-state service model of a sensing-then-transmit
link over block fading, effective-capacity solvers for fixed-rate,
variable-rate, and variable-power transmission, and a seeded Monte Carlo
validator with a constant-arrival queue.
"""

__version__ = "0.1.0"

from .channel import (
    OutageThresholds,
    ScenarioConfig,
    SnrQuad,
    derive_snrs,
    outage_threshold,
    outage_thresholds,
    tail_prob,
)
from .effcap import (
    EffCapResult,
    PowerPolicy,
    Scheme,
    effcap_fixed_value,
    effcap_var_power,
    effcap_var_rate_fixed_power,
    effective_capacity,
    eval_power_policy,
    optimize_fixed_rates,
    solve_power_threshold,
)
from .errors import (
    BracketError,
    CogcapError,
    ConfigError,
    ConvergenceError,
    QuadratureError,
    ValidationFailure,
)
from .numerics import (
    DEFAULT_TOL,
    FadingKind,
    FadingModel,
    Tolerance,
    expect_over_fading,
    find_root_monotone,
    gaussian_q,
    reg_lower_gamma,
)
from .sensing import (
    SensingConfig,
    SensingPerformance,
    detection_prob,
    false_alarm_prob,
    sensing_performance,
    sensing_performance_gaussian,
)
from .sim import (
    EmpiricalEffcap,
    FrameSample,
    QueueStats,
    SimTrace,
    delay_violation_bound,
    detector_monte_carlo,
    empirical_effcap,
    export_trace_csv,
    simulate_queue,
    simulate_service,
)
from .states import (
    MgfDiag,
    StateModel,
    explicit_transition_matrix,
    spectral_radius_rank1,
    transition_probs,
)

__all__ = [
    "__version__",
    # numerics
    "FadingKind", "FadingModel", "Tolerance", "DEFAULT_TOL",
    "reg_lower_gamma", "gaussian_q", "expect_over_fading", "find_root_monotone",
    # sensing
    "SensingConfig", "SensingPerformance", "false_alarm_prob",
    "detection_prob", "sensing_performance", "sensing_performance_gaussian",
    # channel
    "ScenarioConfig", "SnrQuad", "OutageThresholds", "derive_snrs",
    "outage_threshold", "outage_thresholds", "tail_prob",
    # states
    "StateModel", "MgfDiag", "transition_probs", "spectral_radius_rank1",
    "explicit_transition_matrix",
    # effcap
    "Scheme", "EffCapResult", "PowerPolicy", "effcap_fixed_value",
    "optimize_fixed_rates", "effcap_var_rate_fixed_power", "eval_power_policy",
    "solve_power_threshold", "effcap_var_power", "effective_capacity",
    # sim
    "FrameSample", "SimTrace", "QueueStats", "EmpiricalEffcap",
    "simulate_service", "empirical_effcap", "simulate_queue",
    "delay_violation_bound", "detector_monte_carlo", "export_trace_csv",
    # errors
    "CogcapError", "ConfigError", "QuadratureError", "BracketError",
    "ConvergenceError", "ValidationFailure",
]
