"""Exception hierarchy shared by all modules.

Two top-level families matter for the CLI exit codes: configuration
problems (exit code 2) and numerical failures (exit code 3).
"""


class MultimodeQedError(Exception):
    """Base class for all package errors."""


class ConfigError(MultimodeQedError):
    """Invalid, missing, or unknown configuration input."""


class ParameterError(ConfigError):
    """A physical parameter violates its domain (carries the parameter name)."""

    def __init__(self, name, value, reason):
        self.name = name
        self.value = value
        super().__init__(f"parameter '{name}' = {value!r}: {reason}")


class NumericsError(MultimodeQedError):
    """Base class for numerical failures (CLI exit code 3)."""


class BracketError(NumericsError):
    """A real root was missed by the sign-change census."""


class RootConvergenceError(NumericsError):
    """Newton (or bisection) failed to converge to a root."""


class SeedCollisionError(NumericsError):
    """Two independent root searches converged to the same root."""


class CensusMismatchError(NumericsError):
    """Argument-principle count disagrees with the number of roots found."""


class PoleProximityError(NumericsError):
    """Evaluation requested too close to a pole of the expression."""


class SingularMatchingError(NumericsError):
    """Boundary-matching linear system is (near-)singular."""


class TrackCrossingError(NumericsError):
    """Root tracking became ambiguous at an avoided crossing."""


class GridError(NumericsError):
    """A time or frequency grid violates a solver precondition."""


class UnboundedMotionError(NumericsError):
    """Initial energy exceeds the bounded-motion threshold of the quartic well."""
