"""
Field converters for raw event values.

This module turns raw field values (strings from CSV, JSON scalars) into
the typed values an event record needs: epoch-second timestamps and
finite floats.
"""

import logging
import math
from abc import ABC, abstractmethod
from datetime import datetime, timezone
from typing import Any

from dateutil import parser as date_parser

logger = logging.getLogger(__name__)


class FieldConverter(ABC):
    """Abstract base class for raw field converters."""

    @abstractmethod
    def convert(self, value: Any) -> Any:
        """Convert a raw value, raising ValueError when it is unusable."""
        pass


class TimestampConverter(FieldConverter):
    """
    Normalizes timestamps to integer seconds since the Unix epoch.

    Accepts integer epochs (as int or digit string) and ISO-8601 strings.
    ISO values without an offset are taken as UTC.
    """

    def convert(self, value: Any) -> int:
        if isinstance(value, bool):
            raise ValueError(f"boolean is not a timestamp: {value!r}")

        if isinstance(value, int):
            return self._check_epoch(value)

        if isinstance(value, float):
            if not math.isfinite(value) or not value.is_integer():
                raise ValueError(f"non-integral epoch timestamp: {value!r}")
            return self._check_epoch(int(value))

        if isinstance(value, str):
            text = value.strip()
            if not text:
                raise ValueError("empty timestamp")
            if text.lstrip("-").isdigit():
                return self._check_epoch(int(text))
            return self._check_epoch(self._parse_iso(text))

        raise ValueError(f"unsupported timestamp type: {type(value).__name__}")

    def _parse_iso(self, text: str) -> int:
        try:
            parsed = date_parser.isoparse(text)
        except (ValueError, OverflowError) as e:
            raise ValueError(f"invalid ISO-8601 timestamp {text!r}: {e}") from e

        if parsed.tzinfo is None:
            parsed = parsed.replace(tzinfo=timezone.utc)

        epoch = parsed - datetime(1970, 1, 1, tzinfo=timezone.utc)
        return epoch.days * 86400 + epoch.seconds

    def _check_epoch(self, seconds: int) -> int:
        if seconds < 0:
            raise ValueError(f"timestamp before the epoch: {seconds}")
        return seconds


class FloatConverter(FieldConverter):
    """Converts a raw value to a finite float."""

    def convert(self, value: Any) -> float:
        if isinstance(value, bool):
            raise ValueError(f"boolean is not a number: {value!r}")
        result = float(value)
        if not math.isfinite(result):
            raise ValueError(f"non-finite number: {value!r}")
        return result


class UserIdConverter(FieldConverter):
    """Keeps user ids opaque but rejects empty ones."""

    def convert(self, value: Any) -> str:
        if value is None or isinstance(value, (dict, list)):
            raise ValueError(f"invalid user id: {value!r}")
        text = str(value).strip()
        if not text:
            raise ValueError("empty user id")
        return text
