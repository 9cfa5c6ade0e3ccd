"""Elastic Net, simulated annealing and tunneling-style refinement for the TSP."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    DataError,
    DivergentRate,
    InstanceTooLarge,
    InvalidArgument,
    InvalidTour,
    NumericFailure,
    ParseError,
    PreconditionViolation,
    QenetError,
    StuckState,
    UnreachableMinimum,
)
