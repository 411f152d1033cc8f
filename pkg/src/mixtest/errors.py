"""Exception types raised across the package."""


class MixtestError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(MixtestError, ValueError):
    """A distribution or model parameter lies outside its domain."""


class UnsupportedOperationError(MixtestError, NotImplementedError):
    pass


class ContractError(MixtestError, ValueError):
    """An input violates a documented precondition (shape, simplex, range)."""


class DegenerateSupportError(MixtestError, ValueError):
    """Every component assigns zero density to some observation."""

    def __init__(self, index, value=None):
        self.index = int(index)
        self.value = value
        msg = f"observation {self.index} has zero density under every component"
        if value is not None:
            msg += f" (value={value!r})"
        super().__init__(msg)


class ConfigurationError(MixtestError, ValueError):
    pass


class NumericGuardError(MixtestError, FloatingPointError):
    pass


class AccuracyError(MixtestError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        super().__init__(message if achieved is None else f"{message} (achieved {achieved:.3g})")


class DesignError(MixtestError, ValueError):
    """Design matrix is rank deficient or malformed."""


class DegenerateRescaleError(MixtestError, ZeroDivisionError):
    pass


class ImproperPosteriorError(MixtestError, ValueError):
    """The posterior under the chosen improper prior is not integrable."""


class ParseError(MixtestError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")
