"""
Parser strategies for the supported event line formats.

This module implements the Strategy pattern for parsing single lines of
an event file (CSV or JSON-lines) into typed field dictionaries.
"""

import csv
import json
import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

from eventstream.converters import FloatConverter, TimestampConverter, UserIdConverter
from eventstream.errors import (
    EventParsingError,
    EventSourceError,
    InvalidCoordinateError,
)

logger = logging.getLogger(__name__)

EVENT_FIELDS = ("user_id", "timestamp", "lat", "lon")


class LineParser(ABC):
    """Abstract base class for event line parsers."""

    name: str = "LineParser"

    def __init__(self) -> None:
        self.timestamps = TimestampConverter()
        self.floats = FloatConverter()
        self.user_ids = UserIdConverter()

    @abstractmethod
    def can_parse(self, first_line: str) -> bool:
        """
        Check if this parser handles a source whose first line is given.

        Args:
            first_line: First non-empty line of the source

        Returns:
            True if this parser can handle the source
        """
        pass

    def is_header(self, line: str) -> bool:
        """Whether the line is a header row to be skipped."""
        return False

    @abstractmethod
    def parse(self, line: str, line_number: Optional[int] = None) -> Dict[str, Any]:
        """
        Parse one event line.

        Args:
            line: Raw line without trailing newline
            line_number: 1-based line number, for diagnostics

        Returns:
            Dict with user_id (str), timestamp (int), lat and lon (float)

        Raises:
            EventParsingError: If the line is malformed
        """
        pass

    def _convert(
        self, fields: Dict[str, Any], line: str, line_number: Optional[int]
    ) -> Dict[str, Any]:
        try:
            lat = self.floats.convert(fields["lat"])
            lon = self.floats.convert(fields["lon"])
            if not -90.0 <= lat <= 90.0 or not -180.0 <= lon <= 180.0:
                raise InvalidCoordinateError(lat, lon, "out of range")
            return {
                "user_id": self.user_ids.convert(fields["user_id"]),
                "timestamp": self.timestamps.convert(fields["timestamp"]),
                "lat": lat,
                "lon": lon,
            }
        except (KeyError, TypeError, ValueError, InvalidCoordinateError) as e:
            raise EventParsingError(line, self.name, e, line_number)


class CsvEventParser(LineParser):
    """Parser for `user_id,timestamp,lat,lon` CSV lines."""

    name = "CsvEventParser"
    HEADER = ",".join(EVENT_FIELDS)

    def can_parse(self, first_line: str) -> bool:
        return self.is_header(first_line)

    def is_header(self, line: str) -> bool:
        return line.strip().replace(" ", "") == self.HEADER

    def parse(self, line: str, line_number: Optional[int] = None) -> Dict[str, Any]:
        try:
            rows = list(csv.reader([line]))
        except csv.Error as e:
            raise EventParsingError(line, self.name, e, line_number)

        if len(rows) != 1 or len(rows[0]) != len(EVENT_FIELDS):
            raise EventParsingError(
                line,
                self.name,
                ValueError(f"expected {len(EVENT_FIELDS)} columns"),
                line_number,
            )

        return self._convert(dict(zip(EVENT_FIELDS, rows[0])), line, line_number)


class JsonLinesEventParser(LineParser):
    """Parser for one JSON object per line with the four event keys."""

    name = "JsonLinesEventParser"

    def can_parse(self, first_line: str) -> bool:
        return first_line.lstrip().startswith("{")

    def parse(self, line: str, line_number: Optional[int] = None) -> Dict[str, Any]:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise EventParsingError(line, self.name, e, line_number)

        if not isinstance(obj, dict):
            raise EventParsingError(
                line, self.name, ValueError("line is not a JSON object"), line_number
            )

        return self._convert(obj, line, line_number)


class ParserChain:
    """
    Chain of responsibility for choosing a line parser.

    Tries each parser in order until one accepts the first line of the source.
    """

    def __init__(self, parsers: Optional[List[LineParser]] = None):
        """
        Initialize the parser chain.

        Args:
            parsers: List of parsers to try in order
        """
        self.parsers = parsers or self._default_parsers()

    def _default_parsers(self) -> List[LineParser]:
        return [CsvEventParser(), JsonLinesEventParser()]

    def select(self, first_line: str) -> LineParser:
        """
        Pick the parser for a source given its first non-empty line.

        Raises:
            EventSourceError: If no parser recognizes the line
        """
        for parser in self.parsers:
            if parser.can_parse(first_line):
                logger.debug(f"Using {parser.name} for event source")
                return parser

        raise EventSourceError(
            f"Unrecognized event format; first line: {first_line[:100]!r}"
        )
