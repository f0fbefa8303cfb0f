"""
Error taxonomy for geodubins
"""
from typing import List, Optional


class GeoDubinsError(Exception):
    """Base class for all geodubins errors"""


class InvalidInputError(GeoDubinsError, ValueError):
    """Input outside the documented domain"""


class PoleError(InvalidInputError):
    """Longitude requested at the pole of a polar chart"""


class ContractError(GeoDubinsError):
    """A construction broke one of its own guarantees"""

    def __init__(self, message: str, deviation: Optional[float] = None):
        super().__init__(message)
        self.deviation = deviation


class ResolutionError(GeoDubinsError):
    """Sampled curve too coarse for the requested test"""

    def __init__(self, message: str, step: float = 0.0, limit: float = 0.0):
        super().__init__(message)
        self.step = step
        self.limit = limit


class InfeasibleError(GeoDubinsError):
    """No admissible curve exists for the request"""

    def __init__(self, message: str, reasons: Optional[List[str]] = None):
        super().__init__(message)
        self.reasons = list(reasons or [])
