"""
Area registry and radius-based extraction.

Events are attributed to the nearest area centroid within the search
radius (closed inequality); ties go to the area listed first.
"""

import itertools
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Set

import numpy as np
from pydantic import ValidationError

from eventstream.geo import Coordinate, haversine_km, haversine_km_many
from geomobility.errors import ConfigError, LoadError
from geomobility.formats import Source, read_table
from geomobility.models import (
    Area,
    AreaSet,
    PopulationRow,
    PopulationTable,
    ScalePreset,
    UserTimeline,
)

logger = logging.getLogger(__name__)

AREAS_HEADER = ["name", "lat", "lon", "population"]
UNASSIGNED = -1

# events x areas distances are computed in blocks of this many events
ASSIGN_CHUNK = 65_536


def resolve_radius(
    scale: Optional[ScalePreset] = None, radius_km: Optional[float] = None
) -> float:
    """Explicit radius wins over the scale preset."""
    if radius_km is not None:
        if not radius_km > 0:
            raise ConfigError(f"search radius must be positive, got {radius_km}")
        return radius_km
    if scale is not None:
        return scale.radius_km
    raise ConfigError("either a scale preset or an explicit radius is required")


def assign_areas(
    lats: np.ndarray, lons: np.ndarray, area_set: AreaSet
) -> np.ndarray:
    """
    Vectorized area assignment.

    Returns:
        Area index per point, UNASSIGNED when no centroid lies within the radius
    """
    lats = np.asarray(lats, dtype=np.float64)
    lons = np.asarray(lons, dtype=np.float64)
    result = np.full(lats.shape[0], UNASSIGNED, dtype=np.int64)

    for start in range(0, lats.shape[0], ASSIGN_CHUNK):
        stop = start + ASSIGN_CHUNK
        block = np.empty((len(area_set), lats[start:stop].shape[0]), dtype=np.float64)
        for i, (lat0, lon0) in enumerate(zip(area_set.lats, area_set.lons)):
            block[i] = haversine_km_many(lats[start:stop], lons[start:stop], lat0, lon0)
        # argmin keeps the first of equal minima, i.e. registry order
        nearest = np.argmin(block, axis=0)
        best = block[nearest, np.arange(block.shape[1])]
        result[start:stop] = np.where(
            best <= area_set.search_radius_km, nearest, UNASSIGNED
        )

    return result


def assign_area(p: Coordinate, area_set: AreaSet) -> Optional[str]:
    """Name of the area an event at p belongs to, or None."""
    idx = assign_areas(np.array([p.lat]), np.array([p.lon]), area_set)[0]
    return None if idx == UNASSIGNED else area_set.areas[idx].name


def assign_timelines(
    timelines: Sequence[UserTimeline], area_set: AreaSet
) -> List[np.ndarray]:
    """Area index of every event, one array per timeline."""
    lats = np.fromiter(
        (e.location.lat for t in timelines for e in t.events), dtype=np.float64
    )
    lons = np.fromiter(
        (e.location.lon for t in timelines for e in t.events), dtype=np.float64
    )
    flat = assign_areas(lats, lons, area_set)

    bounds = list(itertools.accumulate((len(t) for t in timelines), initial=0))
    resolved = int(np.count_nonzero(flat != UNASSIGNED))
    logger.info(
        f"Assigned {resolved}/{flat.shape[0]} event(s) to {len(area_set)} area(s) "
        f"within {area_set.search_radius_km} km"
    )
    return [flat[a:b] for a, b in zip(bounds, bounds[1:])]


def extract_population(
    timelines: Sequence[UserTimeline],
    area_set: AreaSet,
    assignments: Optional[List[np.ndarray]] = None,
) -> PopulationTable:
    """
    Per-area event counts and distinct user counts.

    A user visiting several areas counts once in each of them.
    """
    if assignments is None:
        assignments = assign_timelines(timelines, area_set)

    events = np.zeros(len(area_set), dtype=np.int64)
    users = np.zeros(len(area_set), dtype=np.int64)
    for areas in assignments:
        hit = areas[areas != UNASSIGNED]
        if hit.size == 0:
            continue
        events += np.bincount(hit, minlength=len(area_set))
        users[np.unique(hit)] += 1

    rows = [
        PopulationRow(
            name=area.name,
            census_population=area.census_population,
            twitter_users=int(users[i]),
            twitter_events=int(events[i]),
        )
        for i, area in enumerate(area_set.areas)
    ]
    return PopulationTable(rows=rows)


def mean_pairwise_distance_km(area_set: AreaSet) -> float:
    """Average centroid distance over unordered area pairs."""
    distances = [
        haversine_km(a.centroid, b.centroid)
        for a, b in itertools.combinations(area_set.areas, 2)
    ]
    return float(np.mean(distances)) if distances else 0.0


def median_users(table: PopulationTable) -> float:
    return float(np.median([row.twitter_users for row in table.rows]))


def load_areas(source: Source, search_radius_km: float) -> AreaSet:
    """
    Read an areas CSV with header `name,lat,lon,population`.

    Row order is kept; it fixes the tie-breaking order.

    Raises:
        LoadError: On a bad header, duplicate name, non-positive population
            or invalid coordinate, naming the offending row
    """
    name = str(source) if isinstance(source, (str, Path)) else getattr(source, "name", None)

    areas: List[Area] = []
    seen: Set[str] = set()
    for row_number, (area_name, lat, lon, raw_population) in read_table(
        source, AREAS_HEADER, "areas"
    ):
        if area_name in seen:
            raise LoadError(f"Duplicate area name {area_name!r}", row_number, name)
        try:
            population = int(raw_population)
        except ValueError:
            raise LoadError(f"Invalid population {raw_population!r}", row_number, name)
        if population <= 0:
            raise LoadError(
                f"Population must be positive, got {population}", row_number, name
            )
        try:
            area = Area(
                name=area_name,
                centroid=Coordinate(lat=float(lat), lon=float(lon)),
                census_population=population,
            )
        except ValueError as e:
            raise LoadError(f"Invalid area row: {e}", row_number, name)
        seen.add(area_name)
        areas.append(area)

    if not areas:
        raise LoadError("Areas file has no rows", source=name)

    try:
        return AreaSet(areas=areas, search_radius_km=search_radius_km)
    except ValidationError as e:
        raise LoadError(f"Invalid area set: {e}", source=name)
