"""Exception hierarchy shared by every module."""


class LssvmPsoError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LssvmPsoError, ValueError):
    """Input failed a precondition (bad shape, non-finite value, bad parameter)."""


class DimensionMismatchError(ValidationError):
    pass


class InsufficientDataError(ValidationError):
    def __init__(self, what: str, required: int, given: int):
        self.required = required
        self.given = given
        super().__init__(f"{what}: need at least {required} points, got {given}")


class DegenerateWindowError(ValidationError):
    pass


class ConstantColumnError(ValidationError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"column {column!r} has zero spread; cannot normalize")


class NumericalFailure(LssvmPsoError, ArithmeticError):
    """The KKT system could not be solved to the required accuracy."""

    def __init__(self, message: str, condition: float):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class InitializationError(LssvmPsoError):
    pass


class DataFormatError(LssvmPsoError, ValueError):
    """Problem with an input CSV file."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        prefix = f"row {row}: " if row is not None else ""
        super().__init__(prefix + message)


class MissingColumnsError(DataFormatError):
    pass


class ParseError(DataFormatError):
    pass


class DuplicateDateError(DataFormatError):
    pass


class BarInvariantError(DataFormatError):
    pass


class ConfigError(LssvmPsoError, ValueError):
    """Run configuration is invalid. ``problems`` lists every issue found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ExperimentError(LssvmPsoError):
    """Wraps a failure inside one symbol's experiment with the symbol name."""

    def __init__(self, symbol: str, cause: Exception):
        self.symbol = symbol
        self.cause = cause
        super().__init__(f"{symbol}: {type(cause).__name__}: {cause}")
