"""
Shared builders for unit tests.
"""

from typing import List, Sequence, Tuple

from eventstream.geo import Coordinate
from geomobility.models import Area, AreaSet, EventRecord, UserTimeline


def event(user: str, ts: int, lat: float = 0.0, lon: float = 0.0) -> EventRecord:
    return EventRecord(user_id=user, timestamp=ts, location=Coordinate(lat=lat, lon=lon))


def timeline(user: str, points: Sequence[Tuple[int, float, float]]) -> UserTimeline:
    """Timeline from (timestamp, lat, lon) triples."""
    return UserTimeline(
        user_id=user, events=[event(user, ts, lat, lon) for ts, lat, lon in points]
    )


def area_set(
    specs: Sequence[Tuple[str, float, float, int]], radius_km: float = 50.0
) -> AreaSet:
    """AreaSet from (name, lat, lon, population) tuples."""
    areas: List[Area] = [
        Area(name=name, centroid=Coordinate(lat=lat, lon=lon), census_population=pop)
        for name, lat, lon, pop in specs
    ]
    return AreaSet(areas=areas, search_radius_km=radius_km)
