"""
Seeded synthetic worlds with known ground truth.

Random numbers come from numpy's PCG64 bit generator seeded through
SeedSequence. One child stream builds the world (layout, homes, event
counts); every user gets a further child stream of its own, so output does
not depend on the order users are generated in. Changing the algorithm or
the order of draws changes every generated world and must not happen
silently.
"""

import logging
import math
from bisect import bisect_right
from typing import Dict, List, Optional, Tuple

import numpy as np

from eventstream.geo import EARTH_RADIUS_KM, BoundingBox, Coordinate, haversine_km
from geomobility.errors import ConfigError
from geomobility.interaction import compute_s, predict_flow
from geomobility.models import (
    Area,
    AreaSet,
    EventRecord,
    Layout,
    ModelParams,
    SynthConfig,
    SynthTruth,
)

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "PCG64"
KM_PER_DEGREE = math.pi * EARTH_RADIUS_KM / 180.0
SECONDS_PER_DAY = 86_400
# keeps cumulative timestamps inside int64 when waits are untruncated
MAX_WAIT_SECONDS = 1e12
MAX_LAYOUT_ATTEMPTS = 10_000


def _rng(seed_seq: np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed_seq))


def draw_event_counts(
    rng: np.random.Generator,
    size: int,
    exponent: float,
    cap: Optional[int] = None,
) -> np.ndarray:
    """
    Discrete power-law draws with minimum 1.

    Continuous Pareto values above 0.5 are rounded to the nearest integer.
    """
    u = rng.random(size)
    continuous = 0.5 * (1.0 - u) ** (-1.0 / (exponent - 1.0))
    counts = np.floor(continuous + 0.5)
    if cap is not None:
        counts = np.minimum(counts, cap)
    return counts.astype(np.int64)


def draw_waits(
    rng: np.random.Generator,
    size: int,
    minimum: float,
    exponent: float,
    maximum: Optional[float] = None,
) -> np.ndarray:
    """Pareto(minimum, exponent) waiting times in seconds."""
    u = rng.random(size)
    waits = minimum * (1.0 - u) ** (-1.0 / (exponent - 1.0))
    return np.minimum(waits, MAX_WAIT_SECONDS if maximum is None else maximum)


def generate_layout(config: SynthConfig, rng: np.random.Generator) -> AreaSet:
    """
    Place `n_areas` centroids in the extent with log-uniform populations.

    Raises:
        ConfigError: If the minimum separation cannot be met
    """
    box = config.extent
    placed: List[Coordinate] = []
    attempts = 0
    while len(placed) < config.n_areas:
        attempts += 1
        if attempts > MAX_LAYOUT_ATTEMPTS * config.n_areas:
            raise ConfigError(
                f"cannot place {config.n_areas} areas {config.min_separation_km} km "
                f"apart in the extent"
            )
        candidate = _draw_centroid(config.layout, box, rng)
        if all(
            haversine_km(candidate, other) >= config.min_separation_km
            for other in placed
        ):
            placed.append(candidate)

    log_lo = math.log(config.population_min)
    log_hi = math.log(config.population_max)
    populations = np.rint(np.exp(rng.uniform(log_lo, log_hi, config.n_areas)))

    width = len(str(config.n_areas))
    areas = [
        Area(
            name=f"area{i + 1:0{width}d}",
            centroid=centroid,
            census_population=max(1, int(population)),
        )
        for i, (centroid, population) in enumerate(zip(placed, populations))
    ]
    return AreaSet(areas=areas, search_radius_km=config.analysis_radius_km)


def _draw_centroid(
    layout: Layout, box: BoundingBox, rng: np.random.Generator
) -> Coordinate:
    if layout == Layout.UNIFORM:
        lat = rng.uniform(box.lat_min, box.lat_max)
        lon = rng.uniform(box.lon_min, box.lon_max)
    else:
        # ring hugging the extent boundary, empty interior
        theta = rng.uniform(0.0, 2.0 * math.pi)
        radial = rng.uniform(0.85, 1.0)
        half_lat = (box.lat_max - box.lat_min) / 2
        half_lon = (box.lon_max - box.lon_min) / 2
        lat = box.lat_min + half_lat + radial * half_lat * math.sin(theta)
        lon = box.lon_min + half_lon + radial * half_lon * math.cos(theta)
    return Coordinate(lat=float(lat), lon=float(lon))


def transition_probabilities(area_set: AreaSet, model: ModelParams) -> np.ndarray:
    """
    Per-origin normalized model weights for moves to other areas.

    Row i holds P(next = j | moving away from i); the diagonal is zero.

    Raises:
        ConfigError: If two centroids coincide
    """
    k = len(area_set)
    weights = np.zeros((k, k), dtype=np.float64)
    for i, origin in enumerate(area_set.areas):
        for j, destination in enumerate(area_set.areas):
            if i == j:
                continue
            d = haversine_km(origin.centroid, destination.centroid)
            if d <= 0:
                raise ConfigError(
                    f"areas {origin.name!r} and {destination.name!r} share a centroid"
                )
            s = compute_s(origin, destination, area_set)
            weights[i, j] = predict_flow(
                model, origin.census_population, destination.census_population, d, s
            )

    totals = weights.sum(axis=1, keepdims=True)
    return np.divide(weights, totals, out=np.zeros_like(weights), where=totals > 0)


def generate(config: SynthConfig) -> Tuple[List[EventRecord], SynthTruth]:
    """
    Generate events and the truth that produced them.

    Users get a home area with probability proportional to census population,
    a power-law number of events and Pareto waiting times. Each next event
    stays in the current area with `stay_probability`, otherwise moves by the
    normalized movement-model weights. Event coordinates scatter uniformly
    within `spread_km` of the area centroid.

    Events are returned ordered by (timestamp, user, event index).

    Raises:
        ConfigError: If the layout cannot be built or centroids coincide
    """
    world_seq, users_seq = np.random.SeedSequence(config.seed).spawn(2)
    world = _rng(world_seq)

    area_set = config.areas if config.areas is not None else generate_layout(config, world)
    probabilities = transition_probabilities(area_set, config.movement_model)
    can_move = probabilities.sum(axis=1) > 0

    populations = np.array([a.census_population for a in area_set.areas], dtype=np.float64)
    homes = world.choice(len(area_set), size=config.n_users, p=populations / populations.sum())
    counts = draw_event_counts(
        world, config.n_users, config.tweets_exponent, config.max_events_per_user
    )

    names = area_set.names
    k = len(area_set)
    lat_scale = KM_PER_DEGREE
    width = len(str(config.n_users - 1))

    cumulative = [row.tolist() for row in np.cumsum(probabilities, axis=1)]
    movable = can_move.tolist()
    fallback = [
        _last_positive(row) if movable[i] else i for i, row in enumerate(probabilities)
    ]

    user_ids: List[str] = []
    columns: Dict[str, List[np.ndarray]] = {
        "ts": [], "user": [], "lat": [], "lon": [], "seq": [], "moves": [], "areas": []
    }

    for u, user_seq in enumerate(users_seq.spawn(config.n_users)):
        rng = _rng(user_seq)
        n_events = int(counts[u])
        user_ids.append(f"u{u:0{width}d}")

        start = config.time_origin + int(rng.integers(0, SECONDS_PER_DAY))
        waits = draw_waits(
            rng, n_events - 1, config.waiting_min, config.waiting_exponent, config.waiting_max
        )
        offsets = np.floor(np.concatenate(([0.0], np.cumsum(waits)))).astype(np.int64)

        moving = (rng.random(n_events - 1) >= config.stay_probability).tolist()
        draws = rng.random(n_events - 1).tolist()
        current = int(homes[u])
        path = [current]
        for step in range(n_events - 1):
            if moving[step] and movable[current]:
                current = bisect_right(cumulative[current], draws[step])
                # rounding in the cumulative sum can leave a sliver past the end
                if current >= k:
                    current = fallback[path[-1]]
            path.append(current)
        visited = np.array(path, dtype=np.int64)

        radius = config.spread_km * np.sqrt(rng.random(n_events))
        bearing = 2.0 * math.pi * rng.random(n_events)
        centre_lat = area_set.lats[visited]
        centre_lon = area_set.lons[visited]
        lats = centre_lat + radius * np.cos(bearing) / lat_scale
        lons = centre_lon + radius * np.sin(bearing) / (
            lat_scale * np.cos(np.radians(centre_lat))
        )

        columns["ts"].append(start + offsets)
        columns["user"].append(np.full(n_events, u, dtype=np.int64))
        columns["lat"].append(np.clip(lats, -90.0, 90.0))
        columns["lon"].append(np.clip(lons, -180.0, 180.0))
        columns["seq"].append(np.arange(n_events, dtype=np.int64))
        columns["moves"].append(visited[:-1] * k + visited[1:])
        columns["areas"].append(visited)

    ts = np.concatenate(columns["ts"])
    user = np.concatenate(columns["user"])
    lat = np.concatenate(columns["lat"])
    lon = np.concatenate(columns["lon"])
    seq = np.concatenate(columns["seq"])
    order = np.lexsort((seq, user, ts))

    # every field is in range by construction
    events = [
        EventRecord.model_construct(
            user_id=user_ids[owner],
            timestamp=stamp,
            location=Coordinate.model_construct(lat=y, lon=x),
        )
        for owner, stamp, y, x in zip(
            user[order].tolist(),
            ts[order].tolist(),
            lat[order].tolist(),
            lon[order].tolist(),
        )
    ]

    moves = np.bincount(np.concatenate(columns["moves"]), minlength=k * k)
    area_events = np.bincount(np.concatenate(columns["areas"]), minlength=k)
    area_users = np.bincount(
        np.concatenate([np.unique(a) for a in columns["areas"]]), minlength=k
    )

    truth = SynthTruth(
        home_areas={user_ids[u]: names[int(h)] for u, h in enumerate(homes)},
        event_counts={user_ids[u]: int(c) for u, c in enumerate(counts)},
        movements={
            (names[code // k], names[code % k]): int(moves[code])
            for code in np.flatnonzero(moves).tolist()
        },
        area_users={name: int(area_users[i]) for i, name in enumerate(names)},
        area_events={name: int(area_events[i]) for i, name in enumerate(names)},
    )
    logger.info(
        f"Generated {len(events)} event(s) for {config.n_users} user(s) over "
        f"{len(area_set)} area(s) (seed {config.seed}, {RNG_ALGORITHM})"
    )
    return events, truth


def world_areas(config: SynthConfig) -> AreaSet:
    """The area set `generate` uses for this config."""
    if config.areas is not None:
        return config.areas
    world_seq, _ = np.random.SeedSequence(config.seed).spawn(2)
    return generate_layout(config, _rng(world_seq))


def expected_flows(config: SynthConfig, truth: SynthTruth) -> Dict[Tuple[str, str], int]:
    """
    Realized per-pair movement counts, diagonal included.

    Raises:
        ConfigError: If `truth` does not belong to a world built from `config`
    """
    if len(truth.home_areas) != config.n_users:
        raise ConfigError(
            f"truth holds {len(truth.home_areas)} user(s), config has {config.n_users}"
        )
    known = set(world_areas(config).names)
    unknown = sorted({area for pair in truth.movements for area in pair} - known)
    if unknown:
        raise ConfigError(f"truth moves through unknown area(s): {', '.join(unknown)}")
    return {pair: count for pair, count in sorted(truth.movements.items()) if count > 0}


def _last_positive(row: np.ndarray) -> int:
    return int(np.flatnonzero(row > 0)[-1])
