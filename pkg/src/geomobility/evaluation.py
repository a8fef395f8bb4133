"""
Goodness-of-fit metrics, census vs Twitter population comparison, and
plot-ready binned scatter data.
"""

import logging
import math
from typing import Dict, List, Sequence

import numpy as np
from scipy import stats

from geomobility.activity import DEFAULT_BIN_RATIO, log_bin
from geomobility.errors import (
    DomainError,
    EmptyInputError,
    InsufficientDataError,
    UndefinedCorrelationError,
)
from geomobility.interaction import predict_many
from geomobility.models import (
    ComparedPair,
    ComparisonCell,
    ComparisonRow,
    EvalReport,
    FlowObservation,
    MetricSpace,
    ModelComparison,
    ModelKind,
    ModelParams,
    PopulationComparison,
    PopulationRow,
    PopulationTable,
    ResidualSummary,
)

logger = logging.getLogger(__name__)

HITRATE_THRESHOLD = 0.5
MIN_POPULATION_AREAS = 3


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Sample Pearson product-moment correlation.

    Raises:
        DomainError: On length mismatch or fewer than 2 points
        UndefinedCorrelationError: If either sequence is constant
    """
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.shape != ys.shape:
        raise DomainError(f"length mismatch: {xs.shape[0]} vs {ys.shape[0]}")
    if xs.shape[0] < 2:
        raise DomainError("correlation needs at least 2 points")
    if np.ptp(xs) == 0.0 or np.ptp(ys) == 0.0:
        raise UndefinedCorrelationError("correlation of a constant sequence")

    r = float(stats.pearsonr(xs, ys).statistic)
    return max(-1.0, min(1.0, r))


def correlation_p_value(r: float, n: int) -> float:
    """Two-tailed p-value of r via t = r * sqrt((n - 2) / (1 - r**2))."""
    if n < 3:
        raise InsufficientDataError(f"p-value needs at least 3 points, got {n}")
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * stats.t.sf(abs(t), df=n - 2))


def hitrate50(
    observed: Sequence[float],
    estimated: Sequence[float],
    threshold: float = HITRATE_THRESHOLD,
) -> float:
    """
    Fraction of estimates with relative error strictly below the threshold.

    Raises:
        DomainError: On length mismatch, empty input or observed <= 0
    """
    obs = np.asarray(observed, dtype=np.float64)
    est = np.asarray(estimated, dtype=np.float64)
    if obs.shape != est.shape:
        raise DomainError(f"length mismatch: {obs.shape[0]} vs {est.shape[0]}")
    if obs.shape[0] == 0:
        raise DomainError("hit rate needs at least one pair")
    if np.any(obs <= 0):
        raise DomainError("observed values must be positive")

    relative_error = np.abs(est - obs) / obs
    return float(np.count_nonzero(relative_error < threshold) / obs.shape[0])


def compare_populations(
    table: PopulationTable, space: MetricSpace = MetricSpace.LINEAR
) -> PopulationComparison:
    """
    Rescale Twitter user counts to census totals and correlate.

    The rescale factor is sum(census) / sum(twitter_users). Pearson is taken
    on the raw (census, twitter_users) pairs.

    Raises:
        InsufficientDataError: If fewer than 3 areas have Twitter users
        UndefinedCorrelationError: If either column is constant
    """
    rows = table.rows
    with_users = [r for r in rows if r.twitter_users > 0]
    if not with_users:
        raise InsufficientDataError("no area has any Twitter users")
    if len(with_users) < MIN_POPULATION_AREAS:
        raise InsufficientDataError(
            f"need at least {MIN_POPULATION_AREAS} areas with Twitter users, "
            f"got {len(with_users)}"
        )

    census_total = sum(r.census_population for r in rows)
    twitter_total = sum(r.twitter_users for r in rows)
    factor = census_total / twitter_total

    used = with_users if space == MetricSpace.LOG else rows
    census = [float(r.census_population) for r in used]
    twitter = [float(r.twitter_users) for r in used]
    if space == MetricSpace.LOG:
        census, twitter = list(np.log10(census)), list(np.log10(twitter))

    r = pearson(census, twitter)
    comparison = PopulationComparison(
        rescale_factor=factor,
        pearson=r,
        p_value=correlation_p_value(r, len(used)),
        space=space,
        pairs=[
            ComparedPair(
                name=row.name,
                census=float(row.census_population),
                twitter=float(row.twitter_users),
                rescaled_twitter=factor * row.twitter_users,
            )
            for row in rows
        ],
    )
    logger.info(
        f"Population comparison over {len(used)} area(s): r={r:.4f}, "
        f"p={comparison.p_value:.3g}, factor={factor:.4g}"
    )
    return comparison


def pool_tables(tables: Dict[str, PopulationTable]) -> PopulationTable:
    """Concatenate per-scale tables, prefixing area names with the scale label."""
    return PopulationTable(
        rows=[
            PopulationRow(
                name=f"{label}:{row.name}",
                census_population=row.census_population,
                twitter_users=row.twitter_users,
                twitter_events=row.twitter_events,
            )
            for label, table in tables.items()
            for row in table.rows
        ]
    )


def summarize_residuals(
    predicted: np.ndarray, observed: np.ndarray
) -> ResidualSummary:
    log_ratio = np.log10(predicted) - np.log10(observed)
    return ResidualSummary(
        median_log10_ratio=float(np.median(log_ratio)),
        fraction_overestimated=float(np.mean(predicted > observed)),
        max_abs_log10_error=float(np.max(np.abs(log_ratio))),
    )


def evaluate_model(
    params: ModelParams,
    observations: Sequence[FlowObservation],
    space: MetricSpace = MetricSpace.LOG,
    bin_ratio: float = DEFAULT_BIN_RATIO,
) -> EvalReport:
    """
    Score a model against observed flows.

    Pearson is computed in the chosen space (log: base-10 logs of both),
    the hit rate always in linear space. The binned scatter log-bins the
    (prediction, observed) pairs.

    Raises:
        EmptyInputError: If there are no observations
    """
    if not observations:
        raise EmptyInputError("no observations to evaluate")

    predicted = predict_many(params, observations)
    observed = np.array([o.observed for o in observations], dtype=np.float64)

    if space == MetricSpace.LOG:
        r = pearson(np.log10(predicted), np.log10(observed))
    else:
        r = pearson(predicted, observed)

    report = EvalReport(
        kind=params.kind,
        pearson=r,
        pearson_space=space,
        hitrate50=hitrate50(observed, predicted),
        n_pairs=len(observations),
        binned_scatter=log_bin(list(zip(predicted, observed)), bin_ratio=bin_ratio),
        residuals=summarize_residuals(predicted, observed),
    )
    logger.info(
        f"{params.kind.value}: pearson({space.value})={report.pearson:.4f}, "
        f"HitRate@50%={report.hitrate50:.3f} over {report.n_pairs} pair(s)"
    )
    return report


def compare_models(
    reports: Dict[str, List[EvalReport]], space: MetricSpace = MetricSpace.LOG
) -> ModelComparison:
    """
    Arrange reports as a scales x models table and flag the best per metric.

    Args:
        reports: Scale label -> reports, one per model kind
    """
    rows = []
    for label, row_reports in reports.items():
        best_r = max(r.pearson for r in row_reports)
        best_hit = max(r.hitrate50 for r in row_reports)
        ordered = sorted(row_reports, key=lambda r: list(ModelKind).index(r.kind))
        rows.append(
            ComparisonRow(
                label=label,
                cells=[
                    ComparisonCell(
                        kind=r.kind,
                        pearson=r.pearson,
                        hitrate50=r.hitrate50,
                        best_pearson=r.pearson == best_r,
                        best_hitrate50=r.hitrate50 == best_hit,
                    )
                    for r in ordered
                ],
            )
        )
    return ModelComparison(pearson_space=space, rows=rows)
