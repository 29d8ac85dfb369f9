"""Orthonormal wavelets, dyadic cubes and Hardy-space tools on finite metric measure spaces."""

__version__ = "0.1.0"

from .config import ConfigError, RunConfig
from .lattice import (
    DyadicSystem,
    LatticeError,
    NetHierarchy,
    assign_parents,
    build_cubes,
    build_nets,
    sample_random_system,
    separated_sum_check,
    verify_cube_axioms,
)
from .space import MetricMeasureSpace, SpaceError, doubling_profile, load_space
from .splines import SplineSystem, estimate_splines, verify_spline_regularity
from .wavelets import (
    CoefficientField,
    GramError,
    WaveletBasis,
    analyze,
    build_wavelets,
    inv_sqrt,
    synthesize,
    verify_decay,
    verify_lower_bound,
)

__all__ = [
    "CoefficientField",
    "ConfigError",
    "DyadicSystem",
    "GramError",
    "LatticeError",
    "MetricMeasureSpace",
    "NetHierarchy",
    "RunConfig",
    "SpaceError",
    "SplineSystem",
    "WaveletBasis",
    "analyze",
    "assign_parents",
    "build_cubes",
    "build_nets",
    "build_wavelets",
    "doubling_profile",
    "estimate_splines",
    "inv_sqrt",
    "load_space",
    "sample_random_system",
    "separated_sum_check",
    "synthesize",
    "verify_cube_axioms",
    "verify_decay",
    "verify_lower_bound",
    "verify_spline_regularity",
]
