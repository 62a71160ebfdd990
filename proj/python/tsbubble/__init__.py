"""Sup-ADF bubble tests robust to non-stationary volatility."""

from ._tsbubble import (
    BootstrapResult,
    BubbleSpec,
    DegenerateError,
    Demeaning,
    DgpSpec,
    InvalidSpecError,
    Kernel,
    LengthError,
    NullDistribution,
    NullFamily,
    NullSimulationOptions,
    ParseError,
    TestKind,
    TestResult,
    VarianceProfile,
    VolatilityKind,
    VolatilitySpec,
    adf_window,
    default_r0,
    gsadf,
    gstadf,
    run_experiment_json,
    sadf,
    simulate,
    simulate_null,
    stadf,
    transformed_series,
    variance_profile,
    wild_bootstrap_sadf,
)

__version__ = "0.1.0"
__all__ = [name for name in dir() if not name.startswith("_")]
