"""Exception types shared across the package."""


class FracgroundError(Exception):
    """Base class for all package errors."""


class InvalidFieldError(FracgroundError):
    """Field values are non-finite or otherwise malformed."""


class ShapeMismatchError(FracgroundError):
    """Two fields do not live on the same box."""


class ParameterError(FracgroundError):
    """A scalar parameter is outside its admissible range."""


class ConstantsUndefinedError(FracgroundError):
    """Normalization constants requested at s = 1; use the local operator path."""


class AccuracyError(FracgroundError):
    """A quadrature did not converge to the requested accuracy."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class OracleTooLargeError(FracgroundError):
    """The O(M^(2N)) direct-sum oracle was asked for a grid above its size cap."""


class DegenerateDirectionError(FracgroundError):
    """A nonzero direction was required but the zero field was supplied."""


class NoRootError(FracgroundError):
    """Bracket expansion failed to enclose a fiber root."""


class DegenerateModelError(FracgroundError):
    """Every solver restart collapsed to the zero field."""


class EnergyOverflowError(FracgroundError):
    """An energy term evaluated to a non-finite value."""

    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


class ConfigError(FracgroundError):
    """Run configuration is malformed; message names the offending key."""
