"""
Domain error types. Each carries the CLI exit code it maps to.
"""

from typing import Optional


class GeoMobilityError(Exception):
    """Base exception for all geomobility errors."""

    exit_code = 2


class UsageError(GeoMobilityError):
    """Invalid command line usage."""

    exit_code = 1


class DataError(GeoMobilityError):
    """Input data is missing, malformed or inconsistent."""

    exit_code = 2


class LoadError(DataError):
    """Raised when an input file row violates its format."""

    def __init__(
        self, message: str, row: Optional[int] = None, source: Optional[str] = None
    ):
        super().__init__(message)
        self.row = row
        self.source = source

    def __str__(self) -> str:
        parts = [super().__str__()]
        if self.row is not None:
            parts.append(f"Row: {self.row}")
        if self.source:
            parts.append(f"Source: {self.source}")
        return " | ".join(parts)


class EmptyInputError(DataError):
    """Raised when an operation needs at least one input item."""

    pass


class ConfigError(DataError):
    """Raised for an invalid run or generator configuration."""

    pass


class NumericError(GeoMobilityError):
    """A numerical operation is undefined for its inputs."""

    exit_code = 3


class DomainError(NumericError):
    """Input outside the mathematical domain of an operation."""

    pass


class InsufficientDataError(NumericError):
    """Too few (or degenerate) samples for an estimate."""

    pass


class DegeneratePairError(NumericError):
    """Origin and destination are the same area."""

    pass


class UndefinedCorrelationError(NumericError):
    """Correlation of a constant sequence."""

    pass


class FitError(NumericError):
    """Least-squares fit is under-determined or singular."""

    def __init__(self, kind: str, deficiency: str):
        super().__init__(f"Cannot fit {kind}: {deficiency}")
        self.kind = kind
        self.deficiency = deficiency
