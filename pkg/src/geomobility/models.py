"""
Data models for the mobility estimation pipeline.

This module defines Pydantic models for events, areas, flows, fitted
spatial-interaction models and evaluation reports. These models provide
type safety and validation for data throughout the application.
"""

from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from eventstream.core import EventFormat
from eventstream.geo import BoundingBox, Coordinate


class PairMode(str, Enum):
    """How consecutive events are paired into flows."""

    STRICT = "strict"
    RESOLVED = "resolved"


class ModelKind(str, Enum):
    """Spatial-interaction model family."""

    GRAVITY4 = "gravity4"
    GRAVITY2 = "gravity2"
    RADIATION = "radiation"


class MetricSpace(str, Enum):
    """Space in which correlations are computed."""

    LOG = "log"
    LINEAR = "linear"


class PopulationSource(str, Enum):
    """Where the m, n (and s) populations come from."""

    CENSUS = "census"
    TWITTER = "twitter"


class ScalePreset(str, Enum):
    """Geographic scales with their search radius in km."""

    NATIONAL = "national"
    STATE = "state"
    METRO = "metro"

    @property
    def radius_km(self) -> float:
        return {"national": 50.0, "state": 25.0, "metro": 2.0}[self.value]


class Layout(str, Enum):
    """Synthetic area layouts."""

    UNIFORM = "uniform"
    COASTAL = "coastal"


# Events


class EventRecord(BaseModel):
    """One geo-tagged event."""

    model_config = ConfigDict(frozen=True)

    user_id: str = Field(min_length=1)
    timestamp: int = Field(ge=0)
    location: Coordinate

    @field_validator("user_id")
    @classmethod
    def _check_user_id(cls, value: str) -> str:
        # ids are opaque and read back unchanged from every event format
        if value != value.strip():
            raise ValueError(f"user id {value!r} has leading or trailing whitespace")
        if any(ch in value for ch in "\r\n"):
            raise ValueError(f"user id {value!r} contains a line break")
        return value


class UserTimeline(BaseModel):
    """A user's events sorted by (timestamp, input order)."""

    model_config = ConfigDict(frozen=True)

    user_id: str
    events: List[EventRecord] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_events(self) -> "UserTimeline":
        previous = -1
        for event in self.events:
            if event.user_id != self.user_id:
                raise ValueError(
                    f"event of user {event.user_id!r} in timeline of {self.user_id!r}"
                )
            if event.timestamp < previous:
                raise ValueError("timeline timestamps must be non-decreasing")
            previous = event.timestamp
        return self

    def __len__(self) -> int:
        return len(self.events)


# Activity


class ActivitySummary(BaseModel):
    """Dataset-level activity statistics."""

    n_events: int = Field(ge=0)
    n_users: int = Field(ge=0)
    avg_events_per_user: float = Field(ge=0)
    avg_waiting_time_hours: float = Field(ge=0)
    avg_waiting_time_hours_per_user: float = Field(ge=0)
    avg_locations_per_user: float = Field(ge=0)
    users_exceeding: Dict[int, int]
    events_span_decades: float = Field(ge=0)
    waiting_time_span_decades: float = Field(ge=0)
    location_precision: int = Field(ge=0)
    tail_exponent: Optional[float] = None


class LogBin(BaseModel):
    """One non-empty logarithmic bin."""

    model_config = ConfigDict(frozen=True)

    x: float = Field(gt=0)
    y_mean: float
    count: int = Field(gt=0)


class BinnedDistribution(BaseModel):
    """Points averaged within geometrically spaced x-bins."""

    bins: List[LogBin]
    bin_ratio: float = Field(gt=1.0)

    @model_validator(mode="after")
    def _check_increasing(self) -> "BinnedDistribution":
        xs = [b.x for b in self.bins]
        if any(b >= a for a, b in zip(xs[1:], xs)):
            raise ValueError("bin representatives must be strictly increasing")
        return self

    @property
    def total_count(self) -> int:
        return sum(b.count for b in self.bins)


# Areas


class Area(BaseModel):
    """A named area with its centroid and census population."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    centroid: Coordinate
    census_population: int = Field(gt=0)


class AreaSet(BaseModel):
    """Ordered area registry with its search radius (epsilon)."""

    model_config = ConfigDict(frozen=True)

    areas: List[Area] = Field(min_length=1)
    search_radius_km: float = Field(gt=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _check_unique(self) -> "AreaSet":
        seen = set()
        for area in self.areas:
            if area.name in seen:
                raise ValueError(f"duplicate area name {area.name!r}")
            seen.add(area.name)
        return self

    @cached_property
    def names(self) -> List[str]:
        return [a.name for a in self.areas]

    @cached_property
    def index(self) -> Dict[str, int]:
        return {a.name: i for i, a in enumerate(self.areas)}

    @cached_property
    def lats(self) -> np.ndarray:
        return np.array([a.centroid.lat for a in self.areas], dtype=np.float64)

    @cached_property
    def lons(self) -> np.ndarray:
        return np.array([a.centroid.lon for a in self.areas], dtype=np.float64)

    def get(self, name: str) -> Area:
        return self.areas[self.index[name]]

    def with_radius(self, radius_km: float) -> "AreaSet":
        return AreaSet(areas=self.areas, search_radius_km=radius_km)

    def __len__(self) -> int:
        return len(self.areas)


class PopulationRow(BaseModel):
    """Twitter and census population of one area."""

    model_config = ConfigDict(frozen=True)

    name: str
    census_population: int = Field(gt=0)
    twitter_users: int = Field(ge=0)
    twitter_events: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_users(self) -> "PopulationRow":
        if self.twitter_users > self.twitter_events:
            raise ValueError(
                f"{self.name}: {self.twitter_users} users but only "
                f"{self.twitter_events} events"
            )
        return self


class PopulationTable(BaseModel):
    """Per-area population counts in area-set order."""

    rows: List[PopulationRow]

    def by_name(self) -> Dict[str, PopulationRow]:
        return {row.name: row for row in self.rows}


# Mobility


class FlowMatrix(BaseModel):
    """
    Directed origin -> destination transition counts.

    Pairs that were seen but not counted are split by reason; together with
    the counts they always add up to n_pairs_total.
    """

    counts: Dict[Tuple[str, str], int]
    n_pairs_total: int = Field(ge=0)
    n_pairs_unresolved: int = Field(default=0, ge=0)
    n_pairs_gap_exceeded: int = Field(default=0, ge=0)
    n_pairs_diagonal_removed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_conservation(self) -> "FlowMatrix":
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("flow counts must be non-negative")
        accounted = (
            sum(self.counts.values())
            + self.n_pairs_unresolved
            + self.n_pairs_gap_exceeded
            + self.n_pairs_diagonal_removed
        )
        if accounted != self.n_pairs_total:
            raise ValueError(
                f"flow counters add up to {accounted}, expected {self.n_pairs_total}"
            )
        return self

    @staticmethod
    def is_diagonal(key: Tuple[str, str]) -> bool:
        return key[0] == key[1]

    @property
    def diagonal_total(self) -> int:
        return sum(c for k, c in self.counts.items() if k[0] == k[1])

    @property
    def offdiagonal_total(self) -> int:
        return sum(c for k, c in self.counts.items() if k[0] != k[1])

    def to_rows(self) -> List[Tuple[str, str, int]]:
        """Entries sorted by (origin, destination)."""
        return [(o, d, c) for (o, d), c in sorted(self.counts.items())]


# Spatial-interaction models


class ModelParams(BaseModel):
    """Fitted (or ground-truth) parameters of one model."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: ModelKind
    scale_c: float = Field(gt=0)
    alpha: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None

    @model_validator(mode="after")
    def _check_fields(self) -> "ModelParams":
        expected = {
            ModelKind.GRAVITY4: {"alpha", "beta", "gamma"},
            ModelKind.GRAVITY2: {"gamma"},
            ModelKind.RADIATION: set(),
        }[self.kind]
        for name in ("alpha", "beta", "gamma"):
            present = getattr(self, name) is not None
            if present and name not in expected:
                raise ValueError(f"{name} does not apply to {self.kind.value}")
            if not present and name in expected:
                raise ValueError(f"{self.kind.value} requires {name}")
        return self


class FlowObservation(BaseModel):
    """One observed origin-destination pair with its model inputs."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    origin: str
    destination: str
    m: float = Field(gt=0)
    n: float = Field(gt=0)
    d: float = Field(gt=0)
    s: Optional[float] = Field(default=None, ge=0)
    observed: float = Field(gt=0)


class FitResult(BaseModel):
    """Parameters plus log-space fit diagnostics."""

    params: ModelParams
    rss_log: float = Field(ge=0)
    n_used: int = Field(ge=0)
    n_excluded_zero_flow: int = Field(default=0, ge=0)
    condition_number: float = Field(ge=0)


# Evaluation


class ResidualSummary(BaseModel):
    """Where predictions fall relative to the y = x line."""

    median_log10_ratio: float
    fraction_overestimated: float = Field(ge=0, le=1)
    max_abs_log10_error: float = Field(ge=0)


class EvalReport(BaseModel):
    """Goodness of fit of one model on one set of observations."""

    kind: ModelKind
    pearson: float = Field(ge=-1, le=1)
    pearson_space: MetricSpace
    hitrate50: float = Field(ge=0, le=1)
    n_pairs: int = Field(ge=0)
    binned_scatter: BinnedDistribution
    residuals: ResidualSummary


class ComparedPair(BaseModel):
    """Census vs Twitter population of one area."""

    name: str
    census: float
    twitter: float
    rescaled_twitter: float


class PopulationComparison(BaseModel):
    """Correlation of rescaled Twitter population with census population."""

    rescale_factor: float = Field(gt=0)
    pearson: float = Field(ge=-1, le=1)
    p_value: float = Field(ge=0, le=1)
    space: MetricSpace = MetricSpace.LINEAR
    pairs: List[ComparedPair]


class ComparisonCell(BaseModel):
    """One model's scores at one scale."""

    kind: ModelKind
    pearson: float
    hitrate50: float
    best_pearson: bool = False
    best_hitrate50: bool = False


class ComparisonRow(BaseModel):
    label: str
    cells: List[ComparisonCell]


class ModelComparison(BaseModel):
    """Models x scales table of Pearson and HitRate@50%."""

    pearson_space: MetricSpace
    rows: List[ComparisonRow]


# Synthetic worlds


class SynthConfig(BaseModel):
    """Configuration of a synthetic world."""

    model_config = ConfigDict(allow_inf_nan=False)

    seed: int = 0
    areas: Optional[AreaSet] = None
    n_areas: int = Field(default=20, ge=1)
    extent: BoundingBox = BoundingBox(
        lon_min=113.5, lon_max=153.5, lat_min=-38.5, lat_max=-12.5
    )
    layout: Layout = Layout.UNIFORM
    population_min: int = Field(default=1_000, gt=0)
    population_max: int = Field(default=1_000_000, gt=0)
    min_separation_km: float = Field(default=120.0, ge=0)
    analysis_radius_km: float = Field(default=50.0, gt=0)
    n_users: int = Field(default=1_000, ge=1)
    tweets_exponent: float = Field(default=2.0, gt=1.0)
    max_events_per_user: Optional[int] = Field(default=5_000, ge=1)
    waiting_exponent: float = Field(default=1.8, gt=1.0)
    waiting_min: float = Field(default=60.0, gt=0)
    waiting_max: Optional[float] = Field(default=None, gt=0)
    movement_model: ModelParams = ModelParams(
        kind=ModelKind.GRAVITY2, scale_c=1.0, gamma=2.0
    )
    stay_probability: float = Field(default=0.3, ge=0, le=1)
    spread_km: float = Field(default=5.0, ge=0)
    time_origin: int = Field(default=1_377_993_600, ge=0)

    @model_validator(mode="after")
    def _check_consistency(self) -> "SynthConfig":
        if self.population_min > self.population_max:
            raise ValueError("population_min exceeds population_max")
        if self.waiting_max is not None and self.waiting_max < self.waiting_min:
            raise ValueError("waiting_max is below waiting_min")
        radius = (
            self.areas.search_radius_km if self.areas is not None
            else self.analysis_radius_km
        )
        if self.spread_km >= radius:
            raise ValueError(
                f"spread_km {self.spread_km} must be below the search radius {radius}"
            )
        return self


class SynthTruth(BaseModel):
    """Everything the generator drew, for exact downstream comparison."""

    home_areas: Dict[str, str]
    event_counts: Dict[str, int]
    movements: Dict[Tuple[str, str], int]
    area_users: Dict[str, int]
    area_events: Dict[str, int]


# Runs


class RunConfig(BaseModel):
    """Validated inputs and switches of one command-line run."""

    model_config = ConfigDict(frozen=True)

    events: Optional[Path] = None
    event_format: EventFormat = EventFormat.AUTO
    areas: Optional[Path] = None
    flows: Optional[Path] = None
    population: Optional[Path] = None
    fit_report: Optional[Path] = None
    scale: Optional[ScalePreset] = None
    radius_km: Optional[float] = Field(default=None, gt=0, allow_inf_nan=False)
    scale_label: Optional[str] = None
    bbox: Optional[BoundingBox] = None
    pair_mode: PairMode = PairMode.STRICT
    max_gap_hours: Optional[float] = Field(default=None, ge=0, allow_inf_nan=False)
    models: List[ModelKind] = Field(default_factory=lambda: list(ModelKind))
    space: MetricSpace = MetricSpace.LOG
    population_source: PopulationSource = PopulationSource.CENSUS
    bin_ratio: float = Field(default=10 ** 0.25, gt=1.0)
    location_precision: int = Field(default=4, ge=0)
    tail_xmin: Optional[float] = Field(default=None, gt=0)
    out: Path = Path(".")

    @property
    def max_gap_seconds(self) -> Optional[float]:
        return None if self.max_gap_hours is None else self.max_gap_hours * 3600.0

    @property
    def label(self) -> str:
        """Row label of this run in a comparison table."""
        if self.scale_label:
            return self.scale_label
        if self.radius_km is not None:
            return f"{self.radius_km:g} km"
        return self.scale.value if self.scale is not None else "default"

    def input_paths(self) -> List[Path]:
        return [
            p
            for p in (self.events, self.areas, self.flows, self.population, self.fit_report)
            if p is not None
        ]
