"""
Origin-destination flow extraction from per-user timelines.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from geomobility.areas import UNASSIGNED, assign_timelines
from geomobility.models import AreaSet, FlowMatrix, PairMode, UserTimeline

logger = logging.getLogger(__name__)


def extract_flows(
    timelines: Sequence[UserTimeline],
    area_set: AreaSet,
    mode: PairMode = PairMode.STRICT,
    max_gap: Optional[int] = None,
    assignments: Optional[List[np.ndarray]] = None,
) -> FlowMatrix:
    """
    Count directed transitions between consecutive events of each user.

    In strict mode every raw consecutive pair is examined and pairs with an
    unresolved endpoint are counted as unresolved. In resolved mode events
    outside every area are dropped before pairing. Self-loops are kept.

    Args:
        timelines: Per-user time-ordered events
        area_set: Areas and search radius
        mode: Pairing mode
        max_gap: Largest allowed time between pair members in seconds,
            None for unlimited
        assignments: Precomputed area indices per timeline

    Returns:
        FlowMatrix with counts and the uncounted-pair tallies
    """
    if assignments is None:
        assignments = assign_timelines(timelines, area_set)

    names = area_set.names
    k = len(area_set)
    lengths = np.fromiter(
        (len(t) for t in timelines), dtype=np.int64, count=len(timelines)
    )
    n_events = int(lengths.sum())
    areas = (
        np.concatenate(assignments).astype(np.int64)
        if n_events
        else np.empty(0, dtype=np.int64)
    )
    stamps = np.fromiter(
        (e.timestamp for t in timelines for e in t.events), dtype=np.int64, count=n_events
    )
    owner = np.repeat(np.arange(len(timelines)), lengths)

    if mode == PairMode.RESOLVED:
        keep = areas != UNASSIGNED
        areas, stamps, owner = areas[keep], stamps[keep], owner[keep]

    # consecutive events of one user
    paired = owner[1:] == owner[:-1]
    origins = areas[:-1][paired]
    destinations = areas[1:][paired]
    gaps = np.diff(stamps)[paired]

    both = (origins != UNASSIGNED) & (destinations != UNASSIGNED)
    in_gap = np.ones_like(both) if max_gap is None else gaps <= max_gap
    counted = both & in_gap

    total = int(origins.shape[0])
    unresolved = int(np.count_nonzero(~both))
    gap_exceeded = int(np.count_nonzero(both & ~in_gap))
    codes, tallies = np.unique(
        origins[counted] * k + destinations[counted], return_counts=True
    )

    flows = FlowMatrix(
        counts={
            (names[code // k], names[code % k]): count
            for code, count in zip(codes.tolist(), tallies.tolist())
        },
        n_pairs_total=total,
        n_pairs_unresolved=unresolved,
        n_pairs_gap_exceeded=gap_exceeded,
    )
    logger.info(
        f"Extracted {sum(flows.counts.values())} counted pair(s) of {total} "
        f"({mode.value} mode, {unresolved} unresolved, {gap_exceeded} over max gap)"
    )
    return flows


def offdiagonal(flows: FlowMatrix) -> FlowMatrix:
    """Same matrix without self-loops."""
    kept = {k: c for k, c in flows.counts.items() if not FlowMatrix.is_diagonal(k)}
    return FlowMatrix(
        counts=kept,
        n_pairs_total=flows.n_pairs_total,
        n_pairs_unresolved=flows.n_pairs_unresolved,
        n_pairs_gap_exceeded=flows.n_pairs_gap_exceeded,
        n_pairs_diagonal_removed=flows.n_pairs_diagonal_removed
        + flows.diagonal_total,
    )
