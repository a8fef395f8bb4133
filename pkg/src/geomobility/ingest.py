"""
Event ingestion: parse event files, filter by bounding box and build
per-user timelines.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Dict, Iterable, List, Sequence, Union

from eventstream.core import EventFormat, EventReader
from eventstream.geo import BoundingBox, Coordinate, in_bbox
from geomobility.models import EventRecord, UserTimeline

logger = logging.getLogger(__name__)


@dataclass
class ParseResult:
    """Parsed events plus the reject report."""

    events: List[EventRecord] = field(default_factory=list)
    rejected: int = 0
    rejected_lines: List[int] = field(default_factory=list)


def parse_events(
    source: Union[BinaryIO, Path, str], fmt: EventFormat = EventFormat.CSV
) -> ParseResult:
    """
    Parse an event source into EventRecords, in input order.

    Args:
        source: Binary stream or path
        fmt: csv, json-lines or auto

    Returns:
        ParseResult with events and the count of rejected lines

    Raises:
        EventSourceError: If the source cannot be read
    """
    read = EventReader().read(source, fmt)
    events = [
        EventRecord(
            user_id=row["user_id"],
            timestamp=row["timestamp"],
            location=Coordinate(lat=row["lat"], lon=row["lon"]),
        )
        for row in read.rows
    ]
    return ParseResult(
        events=events, rejected=read.rejected, rejected_lines=read.rejected_lines
    )


def filter_bbox(events: Iterable[EventRecord], box: BoundingBox) -> List[EventRecord]:
    """Order-preserving subsequence of events inside the box."""
    kept = [e for e in events if in_bbox(e.location, box)]
    logger.debug(f"Bounding box kept {len(kept)} event(s)")
    return kept


def build_timelines(events: Sequence[EventRecord]) -> List[UserTimeline]:
    """
    Group events by user and sort each group by timestamp.

    The sort is stable, so events with equal timestamps keep input order.
    Timelines are returned in order of each user's first appearance.
    """
    grouped: Dict[str, List[EventRecord]] = {}
    for event in events:
        grouped.setdefault(event.user_id, []).append(event)

    timelines = [
        UserTimeline(user_id=user_id, events=sorted(group, key=lambda e: e.timestamp))
        for user_id, group in grouped.items()
    ]
    logger.info(f"Built {len(timelines)} timeline(s) from {len(events)} event(s)")
    return timelines


def drop_duplicates(events: Iterable[EventRecord]) -> List[EventRecord]:
    """Remove repeated (user, time, place) events, keeping the first."""
    seen = set()
    unique = []
    for event in events:
        key = (event.user_id, event.timestamp, event.location.lat, event.location.lon)
        if key not in seen:
            seen.add(key)
            unique.append(event)
    return unique
