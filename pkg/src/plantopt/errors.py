"""Exception hierarchy shared across the package."""


class PlantOptError(Exception):
    """Base class for all package errors."""


class SchemaError(PlantOptError):
    """A dataset does not match the expected variable schema."""


class DataParseError(PlantOptError):
    """A cell or row of an input file could not be parsed."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class ValidationError(PlantOptError):
    """An argument violates a documented precondition."""


class SolverError(PlantOptError):
    """The optimizer hit a non-recoverable state (NaN objective, bad setup)."""
