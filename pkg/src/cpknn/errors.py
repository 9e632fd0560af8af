"""Exception types shared across the package."""


class CpknnError(Exception):
    """Base class for all cpknn errors."""


class ParseError(CpknnError):
    """Malformed input file (ragged rows, unreadable cells, bad header)."""


class ValidationError(CpknnError):
    """A parsed value violates a data invariant (NaN/Inf entries)."""

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class TooFewObservations(CpknnError):
    """Fewer than 5 observations; the scan statistic is not well defined."""


class NotEnoughNeighbors(CpknnError):
    """Requested k exceeds n - 1 available neighbors."""


class DegenerateVariance(CpknnError):
    """A scan variance is numerically zero at some candidate t.

    Happens when every node has in-degree exactly k (the difference count
    is then constant) or when the window touches t where the weighted count
    is structurally constant.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DegenerateDenominator(CpknnError):
    """Covariance-derivative closed form evaluated at an excluded endpoint."""


class UnknownFamily(CpknnError):
    """Scenario references an unrecognized distribution family."""


class NoRoot(CpknnError):
    """Critical-value solver could not bracket the requested level."""
