"""Exception hierarchy shared by every module of the package."""


class ExactNMFError(ValueError):
    """Base class for all errors raised by :mod:`exactnmf`."""


class RankMismatch(ExactNMFError):
    pass


class Singular(ExactNMFError):
    pass


class ZeroVector(ExactNMFError):
    pass


class NegativeEntries(ExactNMFError):
    """A candidate factor has an entry below the tolerance.

    ``where`` holds ``(name, row, col)`` of the worst entry and ``value`` its value.
    """

    def __init__(self, message, where=None, value=None):
        super().__init__(message)
        self.where = where
        self.value = value


class DegenerateRow(ExactNMFError):
    pass


class DegenerateSimplex(ExactNMFError):
    pass


class DegenerateSpan(ExactNMFError):
    pass


class NotNormalized(ExactNMFError):
    pass


class EmptyPolyhedron(ExactNMFError):
    pass


class InvalidInstance(ExactNMFError):
    pass


class CoverageInfeasible(ExactNMFError):
    pass


class IterationLimit(ExactNMFError):
    pass


class StructureMismatch(ExactNMFError):
    pass


class TooLarge(ExactNMFError):
    pass


class ParseError(ExactNMFError):
    pass


class SearchStalled(RuntimeError):
    """The local search ended without a solution; not a proof that none exists."""
