"""
Event stream error types for better error handling and debugging.
"""

from typing import Optional


class EventStreamError(Exception):
    """Base exception for all event-stream errors."""

    pass


class InvalidCoordinateError(EventStreamError):
    """Raised when a coordinate is non-finite or outside its valid range."""

    def __init__(self, lat: float, lon: float, reason: Optional[str] = None):
        message = f"Invalid coordinate (lat={lat}, lon={lon})"
        if reason:
            message += f": {reason}"
        super().__init__(message)
        self.lat = lat
        self.lon = lon


class EventSourceError(EventStreamError):
    """Raised when an event source cannot be read or has no usable header."""

    def __init__(self, message: str, source: Optional[str] = None):
        super().__init__(message)
        self.source = source

    def __str__(self) -> str:
        parts = [super().__str__()]
        if self.source:
            parts.append(f"Source: {self.source}")
        return " | ".join(parts)


class EventParsingError(EventStreamError):
    """Raised when a single event line cannot be parsed."""

    def __init__(
        self,
        raw_line: str,
        parser_type: str,
        original_error: Optional[Exception] = None,
        line_number: Optional[int] = None,
    ):
        message = f"Failed to parse event line with {parser_type}"
        if original_error:
            message += f": {original_error}"
        super().__init__(message)
        self.raw_line = raw_line
        self.parser_type = parser_type
        self.original_error = original_error
        self.line_number = line_number

    def __str__(self) -> str:
        parts = [super().__str__()]
        if self.line_number is not None:
            parts.append(f"Line: {self.line_number}")
        parts.append(f"Input: {self.raw_line[:100]}...")
        return " | ".join(parts)
