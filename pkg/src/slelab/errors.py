"""Exception types raised across the package."""


class SLELabError(ValueError):
    """Base class for all input/validation errors raised by slelab."""


class DomainError(SLELabError):
    """A parameter lies outside the domain where a formula is defined."""


class InvalidConfigurationError(SLELabError):
    """A point configuration is degenerate (duplicate points, a point at 0, ...)."""


class InvalidArgumentError(SLELabError):
    """An argument has the wrong shape, sign or length."""


class BoundaryPointError(DomainError):
    """An interior-only formula was asked to evaluate at a real point."""


class PreconditionError(SLELabError):
    """A Monte Carlo scenario violates the precondition of an estimate."""


class CalibrationError(RuntimeError):
    """Calibration of the Green's function normalization failed (e.g. zero hits)."""


class SingularInputError(DomainError):
    """An input sits exactly on a singularity of a closed-form map."""
