__all__ = [
    'SpikeSlabError',
    'PreconditionError',
    'ShapeError',
    'QuadratureError',
    'ConvergenceError',
    'DivergenceError',
    'ChainError',
    'InfeasibleSettingError',
    'ConfigError',
]


class SpikeSlabError(Exception):
    """Base class for every error raised by the package."""


class PreconditionError(SpikeSlabError):
    """An operation was called outside of its domain of validity."""


class ShapeError(SpikeSlabError, ValueError):
    """Array arguments with incompatible shapes."""


class QuadratureError(SpikeSlabError):
    """Adaptive quadrature did not reach the requested tolerance."""


class ConvergenceError(SpikeSlabError):
    """An iterative search exhausted its iteration budget."""


class DivergenceError(SpikeSlabError):
    """Gradient descent on the field Hamiltonian moved uphill repeatedly.

    Args:
        message (str): human readable description
        iterations (int): length of the iterate trace when the run stopped
    """

    def __init__(self, message: str, iterations: int):
        super().__init__(message)
        self.iterations = iterations


class ChainError(SpikeSlabError):
    """A Markov chain reached a state with a non-finite energy or gradient.

    Args:
        message (str): human readable description
        step (int): index of the offending chain state
    """

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class InfeasibleSettingError(SpikeSlabError):
    """A benchmark setting failed the feasibility check and was not forced."""


class ConfigError(SpikeSlabError):
    """A run configuration could not be parsed or validated."""
