"""Memory footprint and update age of the memoryless Read-Copy-Update model."""

from .core import (
    ConvergenceError,
    DerivedParams,
    DomainError,
    ModelParams,
    RandomSource,
    SeriesControl,
    b_k,
    validate,
)
from .analytics import (
    FootprintReport,
    a_w,
    avg_age,
    en_bound_jensen,
    en_bound_simple,
    en_exact,
    lemma1_epsilon,
    p_ek_given_w,
    p_ek_quadrature,
    p_ek_series,
)
from .simulator import (
    ConfigError,
    SimConfig,
    SimStats,
    UpdateRecord,
    estimate_age_from_polygons,
    simulate,
    simulate_n_distribution,
)

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DerivedParams",
    "DomainError",
    "FootprintReport",
    "ModelParams",
    "RandomSource",
    "SeriesControl",
    "SimConfig",
    "SimStats",
    "UpdateRecord",
    "a_w",
    "avg_age",
    "b_k",
    "en_bound_jensen",
    "en_bound_simple",
    "en_exact",
    "estimate_age_from_polygons",
    "lemma1_epsilon",
    "p_ek_given_w",
    "p_ek_quadrature",
    "p_ek_series",
    "simulate",
    "simulate_n_distribution",
    "validate",
]

__version__ = "0.1.0"
