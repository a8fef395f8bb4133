"""
Unit tests for the area registry and population extraction.
"""

import io
import math
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from eventstream.geo import EARTH_RADIUS_KM, Coordinate
from geomobility.areas import (
    UNASSIGNED,
    assign_area,
    assign_areas,
    assign_timelines,
    extract_population,
    load_areas,
    mean_pairwise_distance_km,
    median_users,
    resolve_radius,
)
from geomobility.errors import ConfigError, LoadError
from geomobility.models import ScalePreset
from tests.conftest import area_set, timeline

KM_PER_DEGREE = math.pi * EARTH_RADIUS_KM / 180.0


class TestResolveRadius:
    """Test cases for resolve_radius."""

    @pytest.mark.parametrize(
        "scale, radius", [("national", 50.0), ("state", 25.0), ("metro", 2.0)]
    )
    def test_presets(self, scale: str, radius: float) -> None:
        """Test each scale preset maps to its radius."""
        assert resolve_radius(ScalePreset(scale)) == radius

    def test_explicit_overrides(self) -> None:
        """Test an explicit radius wins over the preset."""
        assert resolve_radius(ScalePreset.NATIONAL, 7.5) == 7.5

    def test_invalid(self) -> None:
        """Test a missing or non-positive radius is a config error."""
        with pytest.raises(ConfigError):
            resolve_radius()
        with pytest.raises(ConfigError):
            resolve_radius(radius_km=0.0)


class TestAssignArea:
    """Test cases for assign_area and its vectorized form."""

    def test_at_centroid(self) -> None:
        """Test a point on a centroid is assigned to that area."""
        areas = area_set([("A", -33.0, 151.0, 10)], radius_km=2.0)
        assert assign_area(Coordinate(lat=-33.0, lon=151.0), areas) == "A"

    def test_just_outside_radius(self) -> None:
        """Test a point just beyond the radius stays unassigned."""
        areas = area_set([("A", 0.0, 0.0, 10)], radius_km=2.0)
        p = Coordinate(lat=0.0, lon=2.1 / KM_PER_DEGREE)
        assert assign_area(p, areas) is None

    def test_nearest_wins(self) -> None:
        """Test overlapping areas resolve to the nearest centroid."""
        areas = area_set([("A", 0.0, 0.0, 10), ("B", 0.0, 0.2, 10)], radius_km=50.0)
        assert assign_area(Coordinate(lat=0.0, lon=0.15), areas) == "B"

    def test_tie_goes_to_first(self) -> None:
        """Test equidistant centroids resolve to registry order."""
        areas = area_set([("A", 0.0, -0.01, 10), ("B", 0.0, 0.01, 10)], radius_km=5.0)
        assert assign_area(Coordinate(lat=0.0, lon=0.0), areas) == "A"
        swapped = area_set([("B", 0.0, 0.01, 10), ("A", 0.0, -0.01, 10)], radius_km=5.0)
        assert assign_area(Coordinate(lat=0.0, lon=0.0), swapped) == "B"

    def test_chunking_does_not_change_result(self) -> None:
        """Test the chunk size does not affect assignments."""
        rng = np.random.default_rng(5)
        areas = area_set(
            [(f"a{i}", float(i), float(i), 10) for i in range(5)], radius_km=80.0
        )
        lats = rng.uniform(-1, 5, 200)
        lons = rng.uniform(-1, 5, 200)
        whole = assign_areas(lats, lons, areas)
        with patch("geomobility.areas.ASSIGN_CHUNK", 7):
            chunked = assign_areas(lats, lons, areas)
        np.testing.assert_array_equal(whole, chunked)
        assert UNASSIGNED in whole

    def test_matches_scalar(self) -> None:
        """Test vectorized assignment agrees with the scalar one."""
        rng = np.random.default_rng(9)
        areas = area_set([("A", 0.0, 0.0, 1), ("B", 0.0, 0.5, 1)], radius_km=30.0)
        lats = rng.uniform(-0.3, 0.3, 100)
        lons = rng.uniform(-0.3, 0.8, 100)
        names = [None if i == UNASSIGNED else areas.names[i] for i in assign_areas(lats, lons, areas)]
        scalar = [assign_area(Coordinate(lat=a, lon=b), areas) for a, b in zip(lats, lons)]
        assert names == scalar


class TestExtractPopulation:
    """Test cases for extract_population."""

    @pytest.fixture
    def areas(self):
        return area_set([("A", 0.0, 0.0, 100), ("B", 0.0, 1.0, 200), ("C", 5.0, 5.0, 50)])

    def test_counts(self, areas) -> None:
        """Test user and event counts per area in registry order."""
        timelines = [
            timeline("u1", [(0, 0.0, 0.0), (1, 0.0, 0.0), (2, 0.0, 1.0)]),
            timeline("u2", [(0, 0.0, 1.0), (5, 20.0, 20.0)]),
        ]
        table = extract_population(timelines, areas)
        rows = table.by_name()
        assert (rows["A"].twitter_users, rows["A"].twitter_events) == (1, 2)
        assert (rows["B"].twitter_users, rows["B"].twitter_events) == (2, 2)
        assert (rows["C"].twitter_users, rows["C"].twitter_events) == (0, 0)
        assert [r.name for r in table.rows] == ["A", "B", "C"]
        assert rows["B"].census_population == 200

    def test_shared_assignments(self, areas) -> None:
        """Test precomputed assignments give the same table."""
        timelines = [timeline("u1", [(0, 0.0, 0.0), (1, 0.0, 1.0)])]
        assignments = assign_timelines(timelines, areas)
        assert [a.tolist() for a in assignments] == [[0, 1]]
        assert extract_population(timelines, areas, assignments) == extract_population(
            timelines, areas
        )

    def test_median_users(self, areas) -> None:
        """Test the median over areas counts empty areas."""
        timelines = [timeline("u1", [(0, 0.0, 0.0)]), timeline("u2", [(0, 0.0, 0.0)])]
        assert median_users(extract_population(timelines, areas)) == 0.0


class TestMeanPairwiseDistance:
    def test_two_areas(self) -> None:
        """Test the mean distance of a single pair."""
        areas = area_set([("A", 0.0, 0.0, 1), ("B", 0.0, 1.0, 1)])
        assert mean_pairwise_distance_km(areas) == pytest.approx(KM_PER_DEGREE)

    def test_single_area(self) -> None:
        """Test one area has zero mean distance."""
        assert mean_pairwise_distance_km(area_set([("A", 0.0, 0.0, 1)])) == 0.0


class TestLoadAreas:
    """Test cases for load_areas."""

    def _load(self, text: str, radius: float = 25.0):
        return load_areas(io.BytesIO(text.encode("utf-8")), radius)

    def test_valid(self) -> None:
        """Test loading a well-formed areas file."""
        areas = self._load("name,lat,lon,population\nSydney,-33.87,151.21,4000000\nPerth,-31.95,115.86,1700000\n")
        assert areas.names == ["Sydney", "Perth"]
        assert areas.search_radius_km == 25.0
        assert areas.get("Perth").census_population == 1700000

    def test_path(self, tmp_path: Path) -> None:
        """Test loading from a path on disk."""
        path = tmp_path / "areas.csv"
        path.write_text("name,lat,lon,population\nA,0,0,1\n", encoding="utf-8")
        assert len(load_areas(path, 2.0)) == 1

    @pytest.mark.parametrize(
        "text, row",
        [
            ("name,lat,population\nA,0,1\n", 1),
            ("name,lat,lon,population\nA,0,0,1\nA,1,1,1\n", 3),
            ("name,lat,lon,population\nA,0,0,0\n", 2),
            ("name,lat,lon,population\nA,0,0,-4\n", 2),
            ("name,lat,lon,population\nA,0,0,many\n", 2),
            ("name,lat,lon,population\nA,0,0,1\nB,91,0,1\n", 3),
            ("name,lat,lon,population\nA,0,0\n", 2),
        ],
    )
    def test_invalid_rows(self, text: str, row: int) -> None:
        """Test malformed rows raise LoadError with the row number."""
        with pytest.raises(LoadError) as exc_info:
            self._load(text)
        assert exc_info.value.row == row
        assert f"Row: {row}" in str(exc_info.value)

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test a missing file names its path."""
        missing = tmp_path / "missing.csv"
        with pytest.raises(LoadError) as exc_info:
            load_areas(missing, 50.0)
        assert str(missing) in str(exc_info.value)

    def test_no_rows(self) -> None:
        """Test a header without rows is rejected."""
        with pytest.raises(LoadError):
            self._load("name,lat,lon,population\n")
