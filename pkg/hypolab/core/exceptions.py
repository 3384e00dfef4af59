"""
Exception hierarchy for the hypolab workbench.
"""

from typing import Optional


class HypolabError(Exception):
    """Base class for all workbench errors."""

    exit_code: int = 3


class OperatorParseError(HypolabError):
    """Operator text does not conform to the mini-language."""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class NotAVectorFieldError(HypolabError):
    """A first-order real operator without zero-order term was expected."""


class WidthUnresolvableError(HypolabError):
    """Mollification width is below twice the grid spacing."""


class SingularSystemError(HypolabError):
    """A per-frequency linear system turned out singular."""


class DivergentIntegralError(HypolabError):
    """The requested oscillatory integral does not converge."""


class InsufficientOctavesError(HypolabError):
    """Gabor scales span fewer dyadic octaves than required."""


class MicrolocalizationError(HypolabError):
    """Input spectrum is not concentrated where the solver requires."""


class ConfigError(HypolabError):
    """Experiment configuration is invalid."""

    exit_code = 2


class ExperimentError(HypolabError):
    """A module error raised while running a named experiment."""

    def __init__(self, experiment: str, cause: Exception):
        self.experiment = experiment
        self.cause = cause
        super().__init__(f"experiment '{experiment}' failed: {cause}")
