"""Exception types raised across the package."""


class ApWeightsError(Exception):
    """Base class for all package errors."""


class DomainError(ApWeightsError, ValueError):
    """A cube or value lies outside the domain where an operation is defined."""


class ParameterError(ApWeightsError, ValueError):
    """An exponent or other numeric parameter is out of range."""


class DegenerateMeasureError(ApWeightsError, ZeroDivisionError):
    """A cube has zero measure with respect to the reference weight."""


class NonIntegrableError(ApWeightsError, ValueError):
    """A power weight exponent is not locally integrable."""


class SeriesError(ApWeightsError, RuntimeError):
    """An iteration series failed to converge within its term budget."""


class FormatError(ApWeightsError, ValueError):
    """A WGT1 / JSON file is malformed."""


class InvariantError(ApWeightsError, AssertionError):
    """An internal consistency check failed (a bug, never user error)."""
