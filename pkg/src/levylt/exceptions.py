"""Exception types shared across the package."""


class LevyltError(Exception):
    """Base class for all package errors."""


class ModelError(LevyltError, ValueError):
    """A Levy triplet violates the standing assumptions."""


class GridError(LevyltError, ValueError):
    """Bad grid parameters or mismatched grids/fingerprints."""


class ConvergenceError(LevyltError, RuntimeError):
    """An iterative solver failed to converge or left its a-priori bounds."""


class SchemeError(LevyltError, ValueError):
    """A simulation scheme was asked to run outside its validity domain."""


class RunawayError(LevyltError, RuntimeError):
    """Event-driven simulation exceeded its configured event cap."""
