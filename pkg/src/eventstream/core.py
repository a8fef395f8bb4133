"""
Core event stream reading engine.

This module reads an event source line by line and hands each line to a
line parser. It knows nothing about users, areas or mobility; it only
turns bytes into typed field dictionaries and keeps the reject report.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, BinaryIO, Dict, Iterable, List, Optional, Union

from eventstream.errors import EventParsingError, EventSourceError
from eventstream.parsers import (
    CsvEventParser,
    JsonLinesEventParser,
    LineParser,
    ParserChain,
)

logger = logging.getLogger(__name__)


class EventFormat(str, Enum):
    """Supported event file formats."""

    CSV = "csv"
    JSONL = "json-lines"
    AUTO = "auto"


@dataclass
class ReadResult:
    """Parsed rows plus the reject report of one source."""

    rows: List[Dict[str, Any]] = field(default_factory=list)
    rejected: int = 0
    rejected_lines: List[int] = field(default_factory=list)


class EventReader:
    """
    Line-oriented event source reader.

    Malformed lines are recorded and skipped; only an unreadable source or a
    missing CSV header aborts the read.
    """

    MAX_REPORTED_REJECTS = 10

    def __init__(self, chain: Optional[ParserChain] = None):
        """
        Initialize the reader.

        Args:
            chain: Parser chain used for format auto-detection
        """
        self.chain = chain or ParserChain()

    def read(
        self, source: Union[BinaryIO, Path, str], fmt: EventFormat = EventFormat.CSV
    ) -> ReadResult:
        """
        Read every event line of a source.

        Args:
            source: Binary stream or a path to open
            fmt: Line format, or AUTO to detect from the first line

        Returns:
            ReadResult with rows in input order

        Raises:
            EventSourceError: If the source is unreadable or has no usable header
        """
        if isinstance(source, (str, Path)):
            path = Path(source)
            try:
                with path.open("rb") as stream:
                    return self._read_lines(stream, fmt, str(path))
            except OSError as e:
                logger.error(f"Cannot read event source {path}: {e}")
                raise EventSourceError(f"Cannot read event source: {e}", str(path))

        try:
            return self._read_lines(source, fmt, getattr(source, "name", None))
        except OSError as e:
            raise EventSourceError(f"Cannot read event source: {e}")

    def _read_lines(
        self, lines: Iterable[bytes], fmt: EventFormat, name: Optional[str]
    ) -> ReadResult:
        result = ReadResult()
        parser: Optional[LineParser] = None

        for line_number, raw in enumerate(lines, start=1):
            try:
                line = raw.decode("utf-8").rstrip("\r\n")
            except UnicodeDecodeError as e:
                self._reject(result, EventParsingError(repr(raw), "utf-8", e, line_number))
                continue

            if not line.strip():
                continue

            if parser is None:
                parser = self._select_parser(line, fmt, name)
                if parser.is_header(line):
                    continue
                if isinstance(parser, CsvEventParser):
                    raise EventSourceError(
                        f"Missing CSV header {CsvEventParser.HEADER!r}", name
                    )

            try:
                result.rows.append(parser.parse(line, line_number))
            except EventParsingError as e:
                self._reject(result, e)

        if result.rejected:
            logger.warning(
                f"Rejected {result.rejected} malformed event line(s); "
                f"first line numbers: {result.rejected_lines}"
            )
        logger.info(f"Read {len(result.rows)} event(s) from {name or 'stream'}")
        return result

    def _select_parser(
        self, first_line: str, fmt: EventFormat, name: Optional[str]
    ) -> LineParser:
        if fmt == EventFormat.CSV:
            return CsvEventParser()
        if fmt == EventFormat.JSONL:
            return JsonLinesEventParser()
        try:
            return self.chain.select(first_line)
        except EventSourceError as e:
            raise EventSourceError(str(e.args[0]), name)

    def _reject(self, result: ReadResult, error: EventParsingError) -> None:
        result.rejected += 1
        if len(result.rejected_lines) < self.MAX_REPORTED_REJECTS:
            result.rejected_lines.append(error.line_number or 0)
        logger.debug(str(error))
