"""EDGE: mutual information estimation with hashed dependence graphs."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConditioningError,
    DecodeError,
    EdgeError,
    EdgeWarning,
    EmptyInputError,
    EmptyStateError,
    InfeasibleConfigurationError,
    InfiniteMIError,
    InvalidArgumentError,
    NumericError,
)
from .hashing import HashConfig, HashMode, hash_point, hash_points, make_hash_configs  # noqa: E402
from .graph import DependenceGraph, build_graph, edge_iter, graph_stats  # noqa: E402
from .estimator import (  # noqa: E402
    GeneratorFunction,
    MIEstimate,
    alpha_divergence,
    base_estimate,
    chi_square,
    generator_from_name,
    mi_from_samples,
    shannon,
    total_variation,
)
from .ensemble import EnsembleEstimate, edge_estimate, solve_weights  # noqa: E402
from .online import EnsembleStream, EpsilonSchedule, StreamState  # noqa: E402
from .synth import DiscreteGaussMix, GaussNoise, generate, oracle_mi  # noqa: E402

__all__ = [
    "__version__",
    "ConditioningError", "DecodeError", "EdgeError", "EdgeWarning", "EmptyInputError",
    "EmptyStateError", "InfeasibleConfigurationError", "InfiniteMIError",
    "InvalidArgumentError", "NumericError",
    "HashConfig", "HashMode", "hash_point", "hash_points", "make_hash_configs",
    "DependenceGraph", "build_graph", "edge_iter", "graph_stats",
    "GeneratorFunction", "MIEstimate", "alpha_divergence", "base_estimate", "chi_square",
    "generator_from_name", "mi_from_samples", "shannon", "total_variation",
    "EnsembleEstimate", "edge_estimate", "solve_weights",
    "EnsembleStream", "EpsilonSchedule", "StreamState",
    "DiscreteGaussMix", "GaussNoise", "generate", "oracle_mi",
]
