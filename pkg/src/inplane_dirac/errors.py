"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class SingularPointError(DomainError):
    """Evaluation requested at a singular point of a profile."""


class OverflowRepresentationError(ArithmeticError):
    """An exponent exceeds what double precision can represent."""


class GridError(ValueError):
    """Sampled fields have inconsistent or unusable grids."""


class QuantizationError(ValueError):
    """The coordinate quantization condition has no solution as posed."""


class SolverError(RuntimeError):
    """A linear solve failed to reach its residual target."""


class AmbiguousCountError(RuntimeError):
    """The low singular spectrum has no gap clear enough to count zero modes.

    The full list of computed singular values is attached as ``singular_values``.
    """

    def __init__(self, message, singular_values):
        super().__init__(message)
        self.singular_values = singular_values


class PhysicsInvariantError(RuntimeError):
    """A computed result violates a physical invariant (unitarity, flux, ...)."""


class ConfigError(ValueError):
    """A run configuration could not be parsed or validated."""
