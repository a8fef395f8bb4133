"""
Per-user activity statistics: events per user, waiting times, distinct
locations, logarithmic binning and power-law tail estimation.
"""

import logging
import math
from collections import Counter
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from geomobility.errors import DomainError, EmptyInputError, InsufficientDataError
from geomobility.models import (
    ActivitySummary,
    BinnedDistribution,
    LogBin,
    UserTimeline,
)

logger = logging.getLogger(__name__)

ACTIVITY_THRESHOLDS = (50, 100, 500, 1000)
DEFAULT_LOCATION_PRECISION = 4
DEFAULT_BIN_RATIO = 10 ** 0.25
MIN_TAIL_SAMPLES = 10


def events_per_user_ratio(n_events: int, n_users: int) -> float:
    """Average number of events per user."""
    if n_users <= 0:
        raise EmptyInputError("no users")
    return n_events / n_users


def summarize(
    timelines: Sequence[UserTimeline],
    location_precision: int = DEFAULT_LOCATION_PRECISION,
) -> ActivitySummary:
    """
    Dataset-level statistics over a collection of timelines.

    Waiting times are pooled over all users. Distinct locations are counted
    after rounding lat/lon to `location_precision` decimals.

    Raises:
        EmptyInputError: If there are no timelines
    """
    if not timelines:
        raise EmptyInputError("cannot summarize an empty timeline collection")

    n_users = len(timelines)
    n_events = sum(len(t) for t in timelines)

    waits = waiting_time_distribution(timelines)
    avg_wait_hours = float(np.mean(waits)) / 3600.0 if waits else 0.0

    per_user_means = [
        float(np.mean(np.diff([e.timestamp for e in t.events]))) / 3600.0
        for t in timelines
        if len(t) > 1
    ]
    avg_wait_per_user = float(np.mean(per_user_means)) if per_user_means else 0.0

    location_counts = [
        len(
            {
                (
                    round(e.location.lat, location_precision),
                    round(e.location.lon, location_precision),
                )
                for e in t.events
            }
        )
        for t in timelines
    ]

    sizes = [len(t) for t in timelines]
    positive_waits = [w for w in waits if w > 0]

    return ActivitySummary(
        n_events=n_events,
        n_users=n_users,
        avg_events_per_user=events_per_user_ratio(n_events, n_users),
        avg_waiting_time_hours=avg_wait_hours,
        avg_waiting_time_hours_per_user=avg_wait_per_user,
        avg_locations_per_user=sum(location_counts) / n_users,
        users_exceeding={
            threshold: sum(1 for s in sizes if s > threshold)
            for threshold in ACTIVITY_THRESHOLDS
        },
        events_span_decades=decade_span(sizes),
        waiting_time_span_decades=decade_span(positive_waits),
        location_precision=location_precision,
    )


def events_per_user_distribution(timelines: Iterable[UserTimeline]) -> Dict[int, int]:
    """Number of users having exactly k events, for every observed k."""
    counts = Counter(len(t) for t in timelines)
    return dict(sorted(counts.items()))


def waiting_time_distribution(timelines: Iterable[UserTimeline]) -> List[int]:
    """Successive timestamp differences, concatenated over users."""
    waits: List[int] = []
    for timeline in timelines:
        stamps = [e.timestamp for e in timeline.events]
        waits.extend(b - a for a, b in zip(stamps, stamps[1:]))
    return waits


def frequency_of(samples: Iterable[int]) -> Dict[int, int]:
    """Value -> occurrence count, sorted by value."""
    return dict(sorted(Counter(samples).items()))


def distribution_points(frequencies: Dict[int, int]) -> List[Tuple[float, float]]:
    """(value, frequency) points for log binning; non-positive values dropped."""
    return [(float(k), float(v)) for k, v in frequencies.items() if k > 0]


def decade_span(samples: Sequence[float]) -> float:
    """Orders of magnitude covered by the positive samples."""
    positive = [s for s in samples if s > 0]
    if not positive:
        return 0.0
    return math.log10(max(positive) / min(positive))


def log_bin(
    points: Sequence[Tuple[float, float]],
    bin_ratio: float = DEFAULT_BIN_RATIO,
    x_min: Optional[float] = None,
) -> BinnedDistribution:
    """
    Average y within geometrically spaced x-bins.

    Bin k covers [x_min * r**k, x_min * r**(k+1)); the last bin is closed on
    the right. Representatives are geometric means of member x values, bin
    values arithmetic means of member y values. Empty bins are omitted.

    Args:
        points: (x, y) pairs with x > 0
        bin_ratio: Edge ratio r > 1
        x_min: Left edge of the first bin, defaults to the smallest x

    Raises:
        DomainError: If any x <= 0 or bin_ratio <= 1
    """
    if bin_ratio <= 1.0:
        raise DomainError(f"bin_ratio must exceed 1, got {bin_ratio}")
    if not points:
        return BinnedDistribution(bins=[], bin_ratio=bin_ratio)

    xs = np.array([p[0] for p in points], dtype=np.float64)
    ys = np.array([p[1] for p in points], dtype=np.float64)
    if np.any(~np.isfinite(xs)) or np.any(xs <= 0):
        raise DomainError("log binning needs strictly positive, finite x values")

    lo = float(xs.min()) if x_min is None else x_min
    if lo <= 0 or lo > xs.min():
        raise DomainError(f"x_min {lo} must be positive and not above the data")

    log_r = math.log(bin_ratio)
    n_bins = max(1, math.ceil(math.log(xs.max() / lo) / log_r))
    while lo * bin_ratio ** n_bins < xs.max():
        n_bins += 1

    idx = np.floor(np.log(xs / lo) / log_r).astype(np.int64)
    edges = lo * bin_ratio ** np.arange(n_bins + 2, dtype=np.float64)
    # fix float drift at the edges
    idx = np.clip(idx, 0, n_bins)
    idx = np.where(xs < edges[idx], idx - 1, idx)
    idx = np.where(xs >= edges[idx + 1], idx + 1, idx)
    idx = np.clip(idx, 0, n_bins - 1)

    bins = []
    for k in np.unique(idx):
        member = idx == k
        bins.append(
            LogBin(
                x=float(np.exp(np.mean(np.log(xs[member])))),
                y_mean=float(np.mean(ys[member])),
                count=int(member.sum()),
            )
        )
    return BinnedDistribution(bins=bins, bin_ratio=bin_ratio)


def estimate_tail_exponent(
    samples: Sequence[float], x_min: float, min_samples: int = MIN_TAIL_SAMPLES
) -> float:
    """
    Continuous maximum-likelihood power-law exponent above x_min.

    alpha = 1 + n / sum(ln(x_i / x_min)) over samples x_i >= x_min.

    Raises:
        DomainError: If x_min is not positive
        InsufficientDataError: If fewer than `min_samples` samples qualify or
            they all equal x_min
    """
    if not x_min > 0:
        raise DomainError(f"x_min must be positive, got {x_min}")

    values = np.asarray(samples, dtype=np.float64)
    tail = values[values >= x_min]
    if tail.size < min_samples:
        raise InsufficientDataError(
            f"need at least {min_samples} samples >= {x_min}, got {tail.size}"
        )

    log_sum = float(np.sum(np.log(tail / x_min)))
    if log_sum <= 0.0:
        raise InsufficientDataError("all tail samples equal x_min; exponent diverges")

    alpha = 1.0 + tail.size / log_sum
    logger.debug(f"Tail exponent {alpha:.4f} from {tail.size} samples >= {x_min}")
    return alpha
