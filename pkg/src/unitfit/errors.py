"""Exception hierarchy shared by every unitfit module."""


class UnitfitError(Exception):
    """Base class for all errors raised by unitfit."""


class DomainError(UnitfitError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class DegenerateSampleError(UnitfitError, ValueError):
    """The data cannot support the requested statistic or estimator."""


class DataError(UnitfitError, ValueError):
    """Malformed or invalid input data (files, dataset names)."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ConvergenceError(UnitfitError, RuntimeError):
    """An iterative routine stopped without meeting its tolerance.

    The best iterate seen is kept on ``best`` so callers can still report it.
    """

    def __init__(self, message, best=None, iterations=0):
        super().__init__(message)
        self.best = best
        self.iterations = iterations
