"""
Geodesic primitives: coordinates, bounding boxes and great-circle distance.

The Earth is a sphere of radius 6371.0 km. Bounding boxes are closed on both
ends and never span the antimeridian.
"""

import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from eventstream.errors import InvalidCoordinateError

EARTH_RADIUS_KM = 6371.0


class Coordinate(BaseModel):
    """A point on the sphere in decimal degrees."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    lat: float = Field(ge=-90.0, le=90.0)
    lon: float = Field(ge=-180.0, le=180.0)

    def as_tuple(self) -> Tuple[float, float]:
        """Return as (lat, lon) tuple."""
        return (self.lat, self.lon)


class BoundingBox(BaseModel):
    """Axis-aligned lon/lat window, closed on every edge."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    lon_min: float = Field(ge=-180.0, le=180.0)
    lon_max: float = Field(ge=-180.0, le=180.0)
    lat_min: float = Field(ge=-90.0, le=90.0)
    lat_max: float = Field(ge=-90.0, le=90.0)

    @model_validator(mode="after")
    def _check_order(self) -> "BoundingBox":
        if self.lon_min > self.lon_max:
            raise ValueError(f"lon_min {self.lon_min} > lon_max {self.lon_max}")
        if self.lat_min > self.lat_max:
            raise ValueError(f"lat_min {self.lat_min} > lat_max {self.lat_max}")
        return self


# Collection window of the Australian geo-tagged dataset.
AUSTRALIA_BBOX = BoundingBox(
    lon_min=112.921112, lon_max=159.278717, lat_min=-54.640301, lat_max=-9.228820
)


def check_coordinate(p: Coordinate) -> None:
    """
    Re-validate a coordinate that may have bypassed model validation.

    Raises:
        InvalidCoordinateError: If lat/lon is non-finite or out of range
    """
    lat, lon = p.lat, p.lon
    if not (math.isfinite(lat) and math.isfinite(lon)):
        raise InvalidCoordinateError(lat, lon, "non-finite value")
    if not -90.0 <= lat <= 90.0 or not -180.0 <= lon <= 180.0:
        raise InvalidCoordinateError(lat, lon, "out of range")


def haversine_km(a: Coordinate, b: Coordinate) -> float:
    """
    Great-circle distance between two coordinates.

    Args:
        a: First point
        b: Second point

    Returns:
        Distance in kilometers, in [0, pi * EARTH_RADIUS_KM]

    Raises:
        InvalidCoordinateError: If either point is invalid
    """
    check_coordinate(a)
    check_coordinate(b)

    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    sin_dphi = math.sin((phi2 - phi1) / 2.0)
    sin_dlam = math.sin(math.radians(b.lon - a.lon) / 2.0)
    h = sin_dphi * sin_dphi + math.cos(phi1) * math.cos(phi2) * sin_dlam * sin_dlam
    # rounding can push h a hair past 1 for antipodal points
    h = min(1.0, max(0.0, h))
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


def haversine_km_many(
    lats: np.ndarray, lons: np.ndarray, lat0: float, lon0: float
) -> np.ndarray:
    """Vectorized haversine from many points to a single reference point."""
    phi = np.radians(np.asarray(lats, dtype=np.float64))
    phi0 = math.radians(lat0)
    sin_dphi = np.sin((phi0 - phi) / 2.0)
    sin_dlam = np.sin(np.radians(lon0 - np.asarray(lons, dtype=np.float64)) / 2.0)
    h = sin_dphi * sin_dphi + np.cos(phi) * math.cos(phi0) * sin_dlam * sin_dlam
    np.clip(h, 0.0, 1.0, out=h)
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(h))


def in_bbox(p: Coordinate, box: BoundingBox) -> bool:
    """Closed-interval membership of a point in a bounding box."""
    check_coordinate(p)
    return box.lon_min <= p.lon <= box.lon_max and box.lat_min <= p.lat <= box.lat_max
