"""Exception hierarchy for tta_lab."""


class TTALabError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(TTALabError, ValueError):
    pass


class InvalidInput(TTALabError, ValueError):
    """Data violates a domain-type invariant (shape, finiteness, range)."""


class SingularGamma(TTALabError, ArithmeticError):
    """The (regularized) residual co-moment matrix cannot be inverted."""


class NonConvergence(TTALabError, RuntimeError):
    pass


class PredictionFileError(TTALabError, ValueError):
    """Problem reading a prediction file. Carries an optional row/column location."""

    def __init__(self, message, *, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class EmptyFile(PredictionFileError):
    pass


class MissingColumn(PredictionFileError):
    pass


class UnexpectedColumn(PredictionFileError):
    pass


class RaggedRows(PredictionFileError):
    pass


class NonNumericCell(PredictionFileError):
    pass
