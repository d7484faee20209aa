"""Parallel verification of ReLU networks by Split-and-Conquer."""

from ._core import (
    EngineError,
    Error,
    Formula,
    Network,
    ParseError,
    PreconditionError,
    default_config,
    iterative_propagate,
    load_nnet,
    oracle,
    polarity,
    presets,
    property_query,
    robustness_query,
    solve,
    verify,
)

__all__ = [
    "EngineError",
    "Error",
    "Formula",
    "Network",
    "ParseError",
    "PreconditionError",
    "default_config",
    "iterative_propagate",
    "load_nnet",
    "oracle",
    "polarity",
    "presets",
    "property_query",
    "robustness_query",
    "solve",
    "verify",
]
