"""Computational entropy of explicit distributions over binary cubes.

Exact information-theoretic entropies, metric entropy against all boolean
distinguishers, HILL entropy against all real-valued ones, explicit fooling
distributions that separate the two, and the brute-force oracles used to
check them.
"""
__version__ = "0.1.0"

from .distributions import (
    COLLISION,
    MIN_ENTROPY,
    SHANNON,
    Distribution,
    EntropyOrder,
    JointDistribution,
    cond_min_entropy_avg,
    cond_min_entropy_worst,
    flattest_within,
    point_mass,
    renyi_entropy,
    smooth_entropy,
    smooth_entropy_bruteforce,
    statistical_distance,
    uniform,
)
from .errors import (
    DimensionError,
    DomainError,
    NumericError,
    SaturationError,
    SizeCapError,
    ValidationError,
)
from .extreme import ExtremeSolution, gamma_curve, gamma_derivative, solve_extreme
from .fooling import (
    FoolingSpec,
    SeparationSpec,
    build_collision_fooler,
    build_shannon_fooler,
    run_conditional_separation,
    run_unconditional_separation,
)
from .leakage import LeakageInstance, verify_chain_rule, verify_leakage_lemma
from .metric import (
    MetricQuery,
    metric_entropy_decide,
    metric_entropy_search,
    min_metric_conditional_decide,
    relaxed_metric_decide,
    top_mass,
)
from .oracle import (
    BoolDistinguisher,
    RealDistinguisher,
    bruteforce_metric,
    hill_entropy_unbounded,
    metric_equals_hill_check,
    separating_hyperplane,
    threshold_extract,
)
from .randomized import RandomizedDistinguisher, simulate_acceptance, simulate_randomized

__all__ = [name for name in dir() if not name.startswith("_")]
