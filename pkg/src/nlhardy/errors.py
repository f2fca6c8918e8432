"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration and hypothesis problems
exit with 2, numerical failures with 3.  Suspected divergence is *not* an
exception; it is reported through the ``diverged`` flag on estimates.
"""


class NlhardyError(Exception):
    """Base class for all package errors."""


class ConfigError(NlhardyError):
    """Invalid configuration, parameters, or CLI input."""


class HypothesisViolation(ConfigError):
    """An inequality case was invoked outside its hypotheses.

    The message names the case id and the violated hypothesis.
    """


class ParamViolation(ConfigError):
    """An exponent relation required by an operation does not hold."""


class NumericalError(NlhardyError):
    """Base class for runtime numerical failures."""


class UnboundedDomain(NumericalError):
    """An integral over an infinite region cannot be truncated safely."""


class NonFinite(NumericalError):
    """An integrand evaluated to NaN/inf away from any declared singular set."""


class MissingGradient(NumericalError):
    """An operation needs an analytic gradient the field does not carry."""
