"""Exception types raised across the package."""


class HadquantError(Exception):
    """Base class for all package errors."""


class ContractViolation(HadquantError, ValueError):
    """An argument breaks a manifold or operation invariant."""


class DegeneratePairError(HadquantError, ValueError):
    """The data point and the candidate point coincide (numerically)."""


class DegenerateSampleError(HadquantError, ValueError):
    """A sample is too concentrated for a statistic to be defined."""


class ConvergenceError(HadquantError, RuntimeError):
    """A numerical limit or iteration failed to settle.

    The offending residual is kept on ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SolverError(HadquantError, RuntimeError):
    """The descent solver could not produce a result."""


class DatasetValidationError(HadquantError, ValueError):
    """A dataset file holds a point that fails its manifold invariant."""

    def __init__(self, message, index=None, invariant=None):
        super().__init__(message)
        self.index = index
        self.invariant = invariant


class DatasetParseError(HadquantError, ValueError):
    """A dataset file is malformed or does not follow the schema."""
