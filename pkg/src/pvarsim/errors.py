"""Exception hierarchy shared across the package."""


class PvarsimError(Exception):
    """Base class for all package errors."""


class GridError(PvarsimError):
    """Invalid grid, misaligned grids, or a non-grid time/space point."""


class DomainError(PvarsimError):
    """Evaluation requested outside the simulated domain (never extrapolated)."""


class NumericalError(PvarsimError):
    """Numerical failure: embedding breakdown, overflow, non-finite state."""


class ConfigError(PvarsimError):
    """Invalid configuration key, value, or file."""
