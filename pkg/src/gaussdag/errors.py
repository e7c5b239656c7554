"""Exception hierarchy shared by all modules."""


class GaussDagError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(GaussDagError, ArithmeticError):
    """Numerical failure (the CLI maps these to exit code 3)."""


class NotPositiveDefinite(NumericalError):
    pass


class InvalidDegreesOfFreedom(GaussDagError, ValueError):
    pass


class DimensionMismatch(GaussDagError, ValueError):
    pass


class EmptySubset(GaussDagError, ValueError):
    pass


class CycleDetected(GaussDagError, ValueError):
    pass


class VariableMismatch(GaussDagError, ValueError):
    pass


class ArcNotCovered(GaussDagError, ValueError):
    pass


class TooLarge(GaussDagError, ValueError):
    pass


class SampleTooSmall(GaussDagError, ValueError):
    pass


class ParseError(GaussDagError, ValueError):
    """Malformed input file; ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class MissingValue(ParseError):
    pass


class NonFinite(ParseError):
    pass
