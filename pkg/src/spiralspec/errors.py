"""Exception hierarchy.

Every error maps onto one CLI exit code through ``exit_code``.
"""


class SpiralSpecError(Exception):
    exit_code = 3


class ConfigurationError(SpiralSpecError, ValueError):
    exit_code = 2


class InvalidWaveTrainError(SpiralSpecError, ValueError):
    pass


class NoConvergenceError(SpiralSpecError, RuntimeError):
    """Newton iteration failed; ``residual`` holds the last residual norm."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class DegenerateSolutionError(SpiralSpecError, RuntimeError):
    pass


class SimulationFailureError(SpiralSpecError, RuntimeError):
    pass


class ContinuationStalledError(SpiralSpecError, RuntimeError):
    def __init__(self, message, last_delta=float("nan")):
        super().__init__(message)
        self.last_delta = last_delta


class NumericalError(SpiralSpecError, RuntimeError):
    pass


class AmbiguityError(SpiralSpecError, RuntimeError):
    """Branch or exponent matching could not be decided; refine the step."""


class InsufficientDataError(SpiralSpecError, ValueError):
    pass


class DomainError(SpiralSpecError, ValueError):
    pass


class NotHyperbolicError(SpiralSpecError, ValueError):
    pass


class ContractionError(SpiralSpecError, RuntimeError):
    """Fixed-point operator is not a contraction; alpha too large."""


class RootFailureError(SpiralSpecError, RuntimeError):
    pass


class StalledBranchError(SpiralSpecError, RuntimeError):
    def __init__(self, message, last_point=None):
        super().__init__(message)
        self.last_point = last_point


class DegenerateExpansionError(SpiralSpecError, ValueError):
    pass


class OutputError(SpiralSpecError, OSError):
    exit_code = 4


class SplittingError(NotHyperbolicError):
    """Eigenvalues do not show the required center/stable separation."""


class ConditioningWarning(UserWarning):
    pass
