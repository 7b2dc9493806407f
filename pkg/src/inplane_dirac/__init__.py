"""Dirac charge transport in an in-plane magnetic field: gauge removal,
Majorana conditions, coordinate quantization, Aharonov-Casher zero modes and a
quantum-ring spin filter."""

from .errors import (
    AmbiguousCountError,
    ConfigError,
    DomainError,
    GridError,
    OverflowRepresentationError,
    PhysicsInvariantError,
    QuantizationError,
    SingularPointError,
    SolverError,
)

__version__ = "0.1.0"

__all__ = [
    "AmbiguousCountError",
    "ConfigError",
    "DomainError",
    "GridError",
    "OverflowRepresentationError",
    "PhysicsInvariantError",
    "QuantizationError",
    "SingularPointError",
    "SolverError",
    "__version__",
]
