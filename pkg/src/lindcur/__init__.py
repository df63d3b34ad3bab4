"""Markovian open-system dynamics on open chains, with the correction
current that restores the lattice continuity equation under dissipation.
"""
from .errors import (
    BinCollision,
    DegenerateKernel,
    DimensionMismatch,
    IndexOutOfRange,
    LengthMismatch,
    LindcurError,
    MissingFrequency,
    NoConvergence,
    NotHermitian,
    OutOfRange,
    ParseError,
    PointwiseUndefined,
    PositivityLost,
    PositivityViolation,
    StepTooCoarse,
    StepTooLarge,
    ValidationError,
)
from .linalg import (
    EigenSystem,
    SuperOperator,
    hermitian_eigensystem,
    superop_adjoint,
    superop_from_action,
)
from .spectral import (
    BohrSpectrum,
    SpectralOperator,
    bohr_frequencies,
    component_at,
    decompose,
    default_freq_tol,
    interaction_picture,
)
from .reservoir import (
    Exponential,
    HalfFourierTable,
    PositivityReport,
    Tabulated,
    WhiteNoise,
    evaluate_kernel,
    gplus_table,
    half_fourier,
    load_tabulated_csv,
    validate_positivity,
)
from .lattice import (
    ChainSpec,
    LatticeOperators,
    build_chain,
    discrete_divergence,
    expectation_report,
)
from .lindblad import (
    LindbladGenerator,
    Trajectory,
    apply_adjoint,
    build_generator,
    evolve,
    pre_lindblad_generator,
    steady_state,
)
from .current import (
    CurrentReport,
    JDEngine,
    build_engine,
    continuity_report,
    divergence_identity_check,
    jd_cumulative_1d,
    jd_expectation,
    jd_finite_time_oracle,
    jd_observable,
    lstar_density,
)
from .config import Config, parse_config

__version__ = "0.1.0"

__all__ = [
    "BinCollision",
    "BohrSpectrum",
    "ChainSpec",
    "Config",
    "CurrentReport",
    "DegenerateKernel",
    "DimensionMismatch",
    "EigenSystem",
    "Exponential",
    "HalfFourierTable",
    "IndexOutOfRange",
    "JDEngine",
    "LatticeOperators",
    "LengthMismatch",
    "LindbladGenerator",
    "LindcurError",
    "MissingFrequency",
    "NoConvergence",
    "NotHermitian",
    "OutOfRange",
    "ParseError",
    "PointwiseUndefined",
    "PositivityLost",
    "PositivityReport",
    "PositivityViolation",
    "SpectralOperator",
    "StepTooCoarse",
    "StepTooLarge",
    "SuperOperator",
    "Tabulated",
    "Trajectory",
    "ValidationError",
    "WhiteNoise",
    "apply_adjoint",
    "bohr_frequencies",
    "build_chain",
    "build_engine",
    "build_generator",
    "component_at",
    "continuity_report",
    "decompose",
    "default_freq_tol",
    "discrete_divergence",
    "divergence_identity_check",
    "evaluate_kernel",
    "evolve",
    "expectation_report",
    "gplus_table",
    "half_fourier",
    "hermitian_eigensystem",
    "interaction_picture",
    "jd_cumulative_1d",
    "jd_expectation",
    "jd_finite_time_oracle",
    "jd_observable",
    "load_tabulated_csv",
    "lstar_density",
    "parse_config",
    "pre_lindblad_generator",
    "steady_state",
    "superop_adjoint",
    "superop_from_action",
    "validate_positivity",
]
