"""Exception base classes shared across the simulator."""


class CurioError(Exception):
    """Base class for simulator errors."""


class ClearanceViolation(CurioError):
    """Raised when information would flow to a clearance that does not dominate it."""
