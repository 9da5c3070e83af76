"""
Exception types shared across the simulator.
"""


class QocError(Exception):
    """Base class for all simulator errors."""


class ConfigurationError(QocError, ValueError):
    """Raised for malformed files, unknown keys, bad values or dimension mismatches."""


class PlanningError(QocError, ValueError):
    """Raised when a trajectory cannot be planned."""

    def __init__(self, message: str, waypoint_index=None):
        super().__init__(message)
        self.waypoint_index = waypoint_index


class DivergenceError(QocError, RuntimeError):
    """Raised when the closed loop produces non-finite commands or states."""
