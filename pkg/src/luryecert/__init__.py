"""Stability certificates and simulations for Lurye feedback loops.

The loop under study is a stable LTI plant G in negative feedback with a
memoryless, possibly time-varying nonlinearity, driven by exogenous
inputs r1 and r2. The library certifies finite-gain stability through
frequency-domain multiplier conditions, produces closed-form gain bounds
per input/output channel, rules out whole multiplier classes through
phase-limitation tests, and validates everything against time-domain
simulation (periodic attractors, subharmonics, chaos, power seminorms).
"""
from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    CertificationError,
    ConfigError,
    DegenerateIndexSet,
    DegenerateSeparation,
    EmptyRange,
    ImproperTransferFunction,
    LengthNotPowerOfTwo,
    NegativeDiscriminant,
    NoFeasibleMultiplier,
    NonfiniteState,
    NonmonotoneNonlinearity,
    NotACounterexampleCandidate,
    NotSettled,
    NotSuitable,
    PoleOnEvaluationContour,
    RootFindingFailure,
    UnknownExperiment,
    UnstablePlant,
    WindowTooShort,
)
from .lti import (
    FrequencyGrid,
    RationalTransferFunction,
    StabilityReport,
    StateSpaceRealization,
    dc_gain,
    default_grid,
    eval_frequency_response,
    is_minimal,
    markov_parameters,
    poles,
    realization_matches,
    refine_grid_by_phase,
    ss_frequency_response,
    stability_report,
    tf_plus_constant,
    to_state_space,
    zeros,
)
from .multipliers import (
    CounterexampleResult,
    MembershipResult,
    RationalMultiplier,
    TapMultiplier,
    apply_to_periodic,
    build_counterexample,
    identity_multiplier,
    is_periodicity_compatible,
    membership,
    multiplier_from_dict,
    multiplier_response,
    periodic_inner_product,
)
from .analysis import (
    CHANNELS,
    AllPeriodResult,
    GainBoundResult,
    LpFeasibilityResult,
    PhaseGapResult,
    RationalPhaseResult,
    SearchResult,
    SuitabilityResult,
    all_period_test,
    build_grid,
    gain_bound,
    gain_bound_table,
    lp_feasibility_test,
    phase_gap_test,
    rational_phase_limit,
    search_multiplier,
    steady_state_output,
    suitability,
)
from .simulation import (
    ContinuousSimResult,
    DiscreteSimResult,
    NonlinearitySpec,
    PeriodDetection,
    PeriodicDecomposition,
    SinusoidForcing,
    SpectrumResult,
    decompose_periodic,
    detect_period,
    lyapunov_exponent,
    power_seminorm_periodic,
    power_seminorm_tail,
    simulate_continuous,
    simulate_discrete,
    spectrum,
)
from .experiments import (
    ExperimentReport,
    ReportRow,
    list_experiments,
    run_experiment,
)
from ._loops import KERNEL_IMPL

__all__ = [
    "__version__",
    "KERNEL_IMPL",
    # errors
    "CertificationError", "ConfigError", "DegenerateIndexSet",
    "DegenerateSeparation", "EmptyRange", "ImproperTransferFunction",
    "LengthNotPowerOfTwo", "NegativeDiscriminant", "NoFeasibleMultiplier",
    "NonfiniteState", "NonmonotoneNonlinearity", "NotACounterexampleCandidate",
    "NotSettled", "NotSuitable", "PoleOnEvaluationContour",
    "RootFindingFailure", "UnknownExperiment", "UnstablePlant",
    "WindowTooShort",
    # lti
    "FrequencyGrid", "RationalTransferFunction", "StabilityReport",
    "StateSpaceRealization", "dc_gain", "default_grid",
    "eval_frequency_response", "is_minimal", "markov_parameters", "poles",
    "realization_matches", "refine_grid_by_phase", "ss_frequency_response",
    "stability_report", "tf_plus_constant", "to_state_space", "zeros",
    # multipliers
    "CounterexampleResult", "MembershipResult", "RationalMultiplier",
    "TapMultiplier", "apply_to_periodic", "build_counterexample",
    "identity_multiplier", "is_periodicity_compatible", "membership",
    "multiplier_from_dict", "multiplier_response", "periodic_inner_product",
    # analysis
    "CHANNELS", "AllPeriodResult", "GainBoundResult", "LpFeasibilityResult",
    "PhaseGapResult", "RationalPhaseResult", "SearchResult",
    "SuitabilityResult", "all_period_test", "build_grid", "gain_bound",
    "gain_bound_table", "lp_feasibility_test", "phase_gap_test",
    "rational_phase_limit", "search_multiplier", "steady_state_output",
    "suitability",
    # simulation
    "ContinuousSimResult", "DiscreteSimResult", "NonlinearitySpec",
    "PeriodDetection", "PeriodicDecomposition", "SinusoidForcing",
    "SpectrumResult", "decompose_periodic", "detect_period",
    "lyapunov_exponent", "power_seminorm_periodic", "power_seminorm_tail",
    "simulate_continuous", "simulate_discrete", "spectrum",
    # experiments
    "ExperimentReport", "ReportRow", "list_experiments", "run_experiment",
]
