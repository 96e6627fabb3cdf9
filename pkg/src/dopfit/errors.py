"""Exception hierarchy.

Two branches matter to callers: ``DataError`` for invalid inputs (bad files,
mismatched dimensions, out-of-range parameters) and ``NumericalError`` for
computations that cannot proceed (rank exhaustion, singular systems,
degenerate weights). The CLI maps them to distinct exit codes.
"""


class DopfitError(Exception):
    """Base class for all dopfit errors."""


class DataError(DopfitError):
    """Invalid input data or parameters."""


class NumericalError(DopfitError):
    """A numerical operation could not be completed."""


# -- data errors --------------------------------------------------------------

class TooFewSamples(DataError):
    """Fewer than two abscissa samples."""


class DuplicateAbscissa(DataError):
    """Two abscissa values coincide."""


class NonMonotonicAbscissa(DataError):
    """Abscissa values are not strictly increasing."""


class DimensionMismatch(DataError):
    """Array shapes do not agree."""


class NonFiniteData(DataError):
    """Observation values contain NaN or infinity."""


class NegativeSigma(DataError):
    """A noise standard deviation is negative (or not a number)."""


class ZeroSigma(DataError):
    """A noise standard deviation of exactly zero.

    Zero sigma would demand infinite weight, i.e. an exact constraint, which
    this library does not implement. Use ``inf`` to drop a sample instead.
    """


class InvalidRange(DataError):
    """An interval with lower bound >= upper bound."""


class DegreeOutOfRange(DataError):
    """Requested polynomial degree is negative or exceeds 2n - 1."""


class ParseError(DataError):
    """A dataset file could not be parsed."""

    def __init__(self, message, row=None, column=None):
        loc = ""
        if row is not None:
            loc = f" (row {row}" + (f", column {column!r}" if column else "") + ")"
        super().__init__(message + loc)
        self.row = row
        self.column = column


# -- numerical errors ----------------------------------------------------------

class DegenerateWeights(NumericalError):
    """All value weights vanish; the constant basis vector cannot be normalized."""


class DegenerateGrid(NumericalError):
    """The grid cannot support the requested construction."""


class NonPSDInput(NumericalError):
    """A matrix that must be symmetric positive semi-definite is not."""


class RankExhausted(NumericalError):
    """No linearly independent direction remains for a new basis column."""


class SingularSystem(NumericalError):
    """The normal-equation matrix is numerically singular."""
