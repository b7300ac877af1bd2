"""Exception types shared across the workbench.

The CLI maps these onto exit codes: configuration problems (bad flags,
unparseable expressions) exit with 2, sampling and guard problems with 3,
and ordinary check failures with 1.
"""


class EwbenchError(Exception):
    """Base class for all workbench errors."""


class ConfigError(EwbenchError):
    """Invalid run configuration (bad flag combination, malformed JSON, ...)."""


class ExprError(ConfigError):
    """Base class for expression language errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier '{name}' at offset {offset}")
        self.name = name
        self.offset = offset


class DomainError(EwbenchError):
    """Evaluation left the domain of a function (log of a negative, 1/0, ...).

    ``subexpr`` carries the offending subexpression when evaluation went
    through the expression layer.
    """

    def __init__(self, message, subexpr=None):
        if subexpr is not None:
            message = f"{message} in '{subexpr}'"
        super().__init__(message)
        self.subexpr = subexpr


class JetOrderError(EwbenchError):
    """A derivative beyond the supported jet order was requested."""


class SamplingExhaustedError(EwbenchError):
    """Rejection sampling accepted fewer than 1% of draws after the cap."""


class GuardViolationError(EwbenchError):
    """A point violates the guard predicates of its domain."""


class SingularFrameError(EwbenchError):
    """Coframe determinant too close to zero for a frame expansion."""


class SingularMetricError(EwbenchError):
    """Metric determinant too close to zero to invert."""


class DegenerateLegendreError(EwbenchError):
    """|G_pp| below threshold: the generator's Legendre transform degenerates."""


class HeatResidualError(EwbenchError):
    """Class A parameter beta does not satisfy beta_t + beta_yy = 0."""


class GaugeViolationError(EwbenchError):
    """Lift input violates the constant-gauge requirement V*ell = -2."""


class PsiResidualError(EwbenchError):
    """Lift input psi does not satisfy its weighted monopole equation."""
