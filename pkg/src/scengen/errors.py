"""Exception and warning types shared across the package.

Every error raised on purpose by this package derives from
:class:`ScengenError`, so callers can catch one type at the boundary.  The
subclasses mirror the failure classes the public functions document:
bad construction arguments, curve parameters outside the domain,
arclength values off the end of a reference line, failed projections,
and data that is too short or internally inconsistent.
"""


class ScengenError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(ScengenError, ValueError):
    """Invalid construction or configuration arguments."""


class DomainError(ScengenError, ValueError):
    """Curve parameter outside the knot domain."""


class OutOfRangeError(ScengenError, ValueError):
    """Arclength or index beyond the valid range."""


class ProjectionError(ScengenError, ValueError):
    """Point could not be projected onto a reference line."""


class InsufficientDataError(ScengenError, ValueError):
    """Trajectory or array too short for the requested derivation."""


class InconsistencyError(ScengenError, ValueError):
    """Cross-field mismatch inside a composite value."""


class CheckpointError(ScengenError, ValueError):
    """Checkpoint file is malformed or incompatible."""


class NumericalError(ScengenError, ArithmeticError):
    """A computation produced non-finite or otherwise unusable numbers."""


class ClampWarning(UserWarning):
    """A value slightly outside its range was clamped instead of rejected."""
