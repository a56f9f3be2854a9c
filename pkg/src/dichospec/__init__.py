"""Finite-time Lyapunov, dichotomy and nonuniform dichotomy spectra of diagonal
linear systems ``y' = diag(a_1(t), ..., a_n(t)) y``."""

__version__ = "0.1.0"

from .errors import (ConfigError, DichoSpecError, EvaluationError, ExpressionSyntaxError,
                     OutOfRangeError, PreconditionError, ResourceLimitError,
                     UnknownIdentifierError)
from .expr import CoefficientFunction, evaluate, parse_expression, serialize
from .quad import CumulativeIntegral, build_cumulative, integral_between, integral_of_abs
from .steklov import (SteklovParams, default_grid_step, grid_extrema, scaled_gap,
                      steklov_average, steklov_gap)
from .systems import CATALOG, DiagonalSystem, builtin, from_expressions
from .spectra import (BiasReport, ComponentBias, Numerics, ReportConfig, SpectralInterval,
                      SpectrumReport, ed_intervals, full_report, lyapunov_intervals,
                      ned_intervals, nonuniform_bias)
from .wis import (GrowthBound, PairGrid, SeparationCertificate, check_containment,
                  check_weak_separation, estimate_growth_bounds, pair_grid,
                  validate_certificate, wis_membership)

__all__ = [
    "BiasReport", "CATALOG", "CoefficientFunction", "ComponentBias", "ConfigError",
    "CumulativeIntegral", "DiagonalSystem", "DichoSpecError", "EvaluationError",
    "ExpressionSyntaxError", "GrowthBound", "Numerics", "OutOfRangeError", "PairGrid",
    "PreconditionError", "ReportConfig", "ResourceLimitError", "SeparationCertificate",
    "SpectralInterval", "SpectrumReport", "SteklovParams", "UnknownIdentifierError",
    "build_cumulative", "builtin", "check_containment", "check_weak_separation",
    "default_grid_step", "ed_intervals", "estimate_growth_bounds", "evaluate",
    "from_expressions", "full_report", "grid_extrema", "integral_between", "integral_of_abs",
    "lyapunov_intervals", "ned_intervals", "nonuniform_bias", "pair_grid", "parse_expression",
    "scaled_gap", "serialize", "steklov_average", "steklov_gap", "validate_certificate",
    "wis_membership",
]
