"""Exception and warning types raised across the package."""


class EitpropError(Exception):
    """Base class for all package errors."""


class DomainError(EitpropError, ValueError):
    """An argument lies outside the domain of a function."""


class InvalidInterval(EitpropError, ValueError):
    """An integration interval has its lower limit above its upper limit."""


class SingularLogDerivative(EitpropError, ArithmeticError):
    """The coupling vanishes where its logarithmic derivative is needed."""


class NotYetArrived(EitpropError, LookupError):
    """The nonlinear time is undefined: the pulse has not reached this depth."""


class StepSizeError(EitpropError, ArithmeticError):
    """Depth marching became unstable.

    ``suggested_dz`` carries a smaller depth step that should be tried.
    """

    def __init__(self, message, suggested_dz=None):
        super().__init__(message)
        self.suggested_dz = suggested_dz


class ConfigError(EitpropError):
    """Invalid scenario configuration; ``line`` and ``key`` locate the problem."""

    def __init__(self, message, *, section=None, key=None, line=None):
        self.section = section
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if section is not None:
            where.append(f"[{section}]" + (f" {key}" if key else ""))
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ResolutionWarning(UserWarning):
    """Quadrature error estimate exceeds the requested tolerance."""


class WeakProbeWarning(UserWarning):
    """The probe is not weak compared with the coupling field."""


class RegimeWarning(UserWarning):
    """An asymptotic formula is used outside the regime where it holds."""
