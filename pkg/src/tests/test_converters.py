"""
Unit tests for event field converters.
"""

import pytest

from eventstream.converters import FloatConverter, TimestampConverter, UserIdConverter


class TestTimestampConverter:
    """Test cases for TimestampConverter."""

    @pytest.fixture
    def converter(self) -> TimestampConverter:
        return TimestampConverter()

    def test_integer_epoch(self, converter: TimestampConverter) -> None:
        """Test epoch seconds as int, string or whole float."""
        assert converter.convert(1377993600) == 1377993600
        assert converter.convert("1377993600") == 1377993600
        assert converter.convert(12.0) == 12

    def test_iso_utc(self, converter: TimestampConverter) -> None:
        """Test ISO-8601 without offset is read as UTC."""
        assert converter.convert("2013-09-01T00:00:00Z") == 1377993600
        assert converter.convert("2013-09-01T00:00:00") == 1377993600

    def test_iso_offset(self, converter: TimestampConverter) -> None:
        """Test ISO-8601 offsets are applied."""
        assert converter.convert("2013-09-01T10:00:00+10:00") == 1377993600

    @pytest.mark.parametrize("value", ["", "yesterday", -5, "-5", 1.5, True, None])
    def test_rejects(self, converter: TimestampConverter, value: object) -> None:
        """Test unparseable, negative or fractional timestamps are rejected."""
        with pytest.raises(ValueError):
            converter.convert(value)


class TestFloatConverter:
    """Test cases for FloatConverter."""

    def test_converts(self) -> None:
        """Test numeric strings and ints become floats."""
        assert FloatConverter().convert("-33.5") == -33.5
        assert FloatConverter().convert(2) == 2.0

    @pytest.mark.parametrize("value", ["nan", "inf", "abc", False])
    def test_rejects(self, value: object) -> None:
        """Test non-finite values, text and booleans are rejected."""
        with pytest.raises(ValueError):
            FloatConverter().convert(value)


class TestUserIdConverter:
    """Test cases for UserIdConverter."""

    def test_keeps_opaque_ids(self) -> None:
        """Test ids are trimmed and stringified but otherwise kept."""
        assert UserIdConverter().convert(" u1 ") == "u1"
        assert UserIdConverter().convert(42) == "42"

    @pytest.mark.parametrize("value", ["", "   ", None, [1]])
    def test_rejects(self, value: object) -> None:
        """Test blank or structured ids are rejected."""
        with pytest.raises(ValueError):
            UserIdConverter().convert(value)
