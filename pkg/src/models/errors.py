"""Exception hierarchy for the lab"""

from typing import List, Optional


class StableLabError(Exception):
    """Base class for all lab errors"""


class ConfigurationError(StableLabError):
    """Invalid experiment or sampling configuration"""

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class StableDomainError(StableLabError, ValueError):
    """Parameter outside the domain of a mathematical operation"""


class CoefficientError(StableLabError):
    """Coefficient matrix violates non-degeneracy at a visited point"""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class ConvergenceError(StableLabError):
    """Quadrature did not reach the requested tolerance"""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class CensoringError(StableLabError):
    """Too many paths hit the simulation horizon before the monitored event"""

    def __init__(self, message: str, censored_fraction: float, horizon: float):
        super().__init__(message)
        self.censored_fraction = censored_fraction
        self.horizon = horizon


class InsufficientDataError(StableLabError):
    """Not enough events or pairs to produce a fit"""

    def __init__(self, message: str, count: int):
        super().__init__(message)
        self.count = count
