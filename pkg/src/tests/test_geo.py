"""
Unit tests for geodesic primitives.
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from pydantic import ValidationError

from eventstream.errors import InvalidCoordinateError
from eventstream.geo import (
    AUSTRALIA_BBOX,
    EARTH_RADIUS_KM,
    BoundingBox,
    Coordinate,
    haversine_km,
    haversine_km_many,
    in_bbox,
)

coordinates = st.builds(
    Coordinate,
    lat=st.floats(min_value=-90.0, max_value=90.0),
    lon=st.floats(min_value=-180.0, max_value=180.0),
)


class TestCoordinate:
    """Test cases for Coordinate validation."""

    def test_valid(self) -> None:
        """Test a valid coordinate as a (lat, lon) tuple."""
        p = Coordinate(lat=-33.87, lon=151.21)
        assert p.as_tuple() == (-33.87, 151.21)

    @pytest.mark.parametrize(
        "lat, lon",
        [(90.5, 0.0), (-91.0, 0.0), (0.0, 180.01), (0.0, -181.0), (float("nan"), 0.0)],
    )
    def test_invalid(self, lat: float, lon: float) -> None:
        """Test out-of-range or NaN coordinates are rejected."""
        with pytest.raises(ValidationError):
            Coordinate(lat=lat, lon=lon)

    def test_bounds_inclusive(self) -> None:
        """Test the poles and the antimeridian are valid."""
        Coordinate(lat=90.0, lon=180.0)
        Coordinate(lat=-90.0, lon=-180.0)


class TestHaversine:
    """Test cases for great-circle distance."""

    def test_identical_points(self) -> None:
        """Test the distance from a point to itself is zero."""
        p = Coordinate(lat=10.0, lon=20.0)
        assert haversine_km(p, p) == 0.0

    def test_one_degree_on_equator(self) -> None:
        """Test one degree of longitude on the equator."""
        d = haversine_km(Coordinate(lat=0.0, lon=0.0), Coordinate(lat=0.0, lon=1.0))
        assert d == pytest.approx(math.pi * EARTH_RADIUS_KM / 180.0, abs=1e-9)
        assert d == pytest.approx(111.1949, abs=1e-3)

    def test_antipodal(self) -> None:
        """Test antipodal points are half a circumference apart."""
        d = haversine_km(Coordinate(lat=0.0, lon=0.0), Coordinate(lat=0.0, lon=180.0))
        assert d == pytest.approx(math.pi * EARTH_RADIUS_KM)

    def test_non_finite_rejected(self) -> None:
        """Test a NaN coordinate raises InvalidCoordinateError."""
        bad = Coordinate.model_construct(lat=float("nan"), lon=0.0)
        with pytest.raises(InvalidCoordinateError):
            haversine_km(bad, Coordinate(lat=0.0, lon=0.0))

    @given(coordinates, coordinates)
    def test_symmetric_and_bounded(self, a: Coordinate, b: Coordinate) -> None:
        """Test distance is symmetric and within half a circumference."""
        d = haversine_km(a, b)
        assert d == pytest.approx(haversine_km(b, a), abs=1e-3)
        assert 0.0 <= d <= math.pi * EARTH_RADIUS_KM

    @given(coordinates, coordinates, coordinates)
    def test_triangle_inequality(
        self, a: Coordinate, b: Coordinate, c: Coordinate
    ) -> None:
        """Test distance obeys the triangle inequality."""
        assert haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-3

    def test_vectorized_matches_scalar(self) -> None:
        """Test the numpy variant agrees with the scalar one."""
        rng = np.random.default_rng(3)
        lats = rng.uniform(-60, 60, 50)
        lons = rng.uniform(-170, 170, 50)
        origin = Coordinate(lat=-33.0, lon=151.0)
        many = haversine_km_many(lats, lons, origin.lat, origin.lon)
        for lat, lon, d in zip(lats, lons, many):
            expected = haversine_km(Coordinate(lat=lat, lon=lon), origin)
            assert d == pytest.approx(expected, rel=1e-12, abs=1e-9)


class TestBoundingBox:
    """Test cases for bounding boxes."""

    def test_rejects_inverted(self) -> None:
        """Test a box with min above max is rejected."""
        with pytest.raises(ValidationError):
            BoundingBox(lon_min=10, lon_max=0, lat_min=0, lat_max=1)

    def test_closed_edges(self) -> None:
        """Test points on the box edges are inside."""
        box = BoundingBox(lon_min=0, lon_max=1, lat_min=0, lat_max=1)
        assert in_bbox(Coordinate(lat=0.0, lon=1.0), box)
        assert in_bbox(Coordinate(lat=1.0, lon=0.0), box)
        assert not in_bbox(Coordinate(lat=1.0001, lon=0.5), box)

    def test_australia(self) -> None:
        """Test the Australia box contains Sydney but not London."""
        assert in_bbox(Coordinate(lat=-33.87, lon=151.21), AUSTRALIA_BBOX)
        assert not in_bbox(Coordinate(lat=51.5, lon=-0.12), AUSTRALIA_BBOX)
