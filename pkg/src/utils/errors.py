# src/utils/errors.py
from typing import Iterable, Optional, Tuple


class GsioError(Exception):
    """Base exception for structural analysis errors"""

    pass


class SystemFormatError(GsioError, ValueError):
    """Raised when a system or set-cover document cannot be accepted"""

    pass


class InfeasibleError(GsioError):
    """Raised when no placement or matching can satisfy the request"""

    def __init__(self, message: str, hall_set: Optional[Iterable[str]] = None):
        super().__init__(message)
        self.hall_set: Tuple[str, ...] = tuple(hall_set or ())


class CapExceededError(GsioError):
    """Raised when a brute-force search is refused by its size cap"""

    def __init__(self, message: str, cap: int, requested: int):
        super().__init__(message)
        self.cap = cap
        self.requested = requested


class PreconditionError(GsioError, ValueError):
    """Raised when a solver is called outside its documented domain"""

    pass


class RouteDisagreementError(GsioError):
    """Raised when the matching route and the digraph route return different verdicts"""

    pass
