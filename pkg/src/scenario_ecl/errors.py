"""Exception types raised across the package."""

from __future__ import annotations


class ScenarioEclError(Exception):
    """Base class for every error raised by this package."""


class InfeasibleTermStructure(ScenarioEclError, ValueError):
    """An unconditional PD curve implies a conditional PD outside [0, 1]."""


class NonFiniteDelta(ScenarioEclError, ValueError):
    pass


class UnknownBucket(ScenarioEclError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class UnknownScenario(ScenarioEclError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class DomainError(ScenarioEclError, ValueError):
    pass


class DimensionMismatch(ScenarioEclError, ValueError):
    pass


class MismatchedExposure(ScenarioEclError, ValueError):
    pass


class DegenerateSystem(ScenarioEclError, ValueError):
    pass


class EmptyBucket(ScenarioEclError, ValueError):
    pass


class InconsistentBucket(ScenarioEclError, ValueError):
    pass


class IngestError(ScenarioEclError, ValueError):
    """Base for file-level validation failures."""


class SchemaError(IngestError):
    """Header of a CSV file does not match the expected schema."""

    def __init__(self, path, expected, found):
        self.path = str(path)
        self.expected = list(expected)
        self.found = list(found)
        super().__init__(
            f"{self.path}: header mismatch, expected {','.join(self.expected)!r}, "
            f"found {','.join(self.found)!r}"
        )


class RowError(IngestError):
    """A bad value in a data row.

    ``row`` is the 1-based data row number (the header is not counted).
    """

    def __init__(self, row: int, column: str, message: str, path=None):
        self.row = row
        self.column = column
        self.reason = message
        self.path = None if path is None else str(path)
        where = f"{self.path}: " if self.path else ""
        super().__init__(f"{where}row {row}, column {column}: {message}")


class UnknownCategory(RowError):
    """A categorical value outside the registered classification scheme."""

    def __init__(self, row: int, column: str, value, path=None):
        self.value = value
        super().__init__(row, column, f"unknown category {value!r}", path)


class MissingSnapshot(UserWarning):
    """Entities lacking a PD at a requested snapshot were excluded from a fit."""
