"""
Gravity (4- and 2-parameter) and radiation spatial-interaction models.

    gravity4:  P = C * m**alpha * n**beta / d**gamma
    gravity2:  P = C * m * n / d**gamma
    radiation: P = C * m * n / ((m + s) * (m + n + s))

All fits are ordinary least squares on the natural log of the formulas.
"""

import logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from eventstream.geo import haversine_km
from geomobility.errors import DegeneratePairError, DomainError, FitError
from geomobility.models import (
    Area,
    AreaSet,
    FitResult,
    FlowMatrix,
    FlowObservation,
    ModelKind,
    ModelParams,
    PopulationSource,
    PopulationTable,
)

logger = logging.getLogger(__name__)

N_PARAMETERS = {ModelKind.GRAVITY4: 4, ModelKind.GRAVITY2: 2, ModelKind.RADIATION: 1}

# design matrices worse conditioned than this are treated as singular
MAX_CONDITION = 1e10


def compute_s(
    origin: Area,
    destination: Area,
    area_set: AreaSet,
    populations: Optional[Mapping[str, float]] = None,
) -> float:
    """
    Population within distance d of the origin, origin and destination excluded.

    Areas at exactly distance d are included.

    Args:
        origin: Source area
        destination: Destination area
        area_set: All areas
        populations: Population per area name; census populations by default

    Raises:
        DegeneratePairError: If origin and destination are the same area
    """
    if origin.name == destination.name:
        raise DegeneratePairError(f"origin and destination are both {origin.name!r}")

    d = haversine_km(origin.centroid, destination.centroid)
    total = 0.0
    for area in area_set.areas:
        if area.name in (origin.name, destination.name):
            continue
        if haversine_km(origin.centroid, area.centroid) <= d:
            total += (
                area.census_population if populations is None
                else populations[area.name]
            )
    return total


def predict_flow(
    params: ModelParams, m: float, n: float, d: float, s: Optional[float] = None
) -> float:
    """
    Predicted flow for one pair.

    Raises:
        DomainError: If d <= 0, m <= 0, n <= 0, or s is missing for radiation
    """
    if not d > 0:
        raise DomainError(f"distance must be positive, got {d}")
    if not (m > 0 and n > 0):
        raise DomainError(f"populations must be positive, got m={m}, n={n}")

    if params.kind == ModelKind.GRAVITY4:
        return params.scale_c * m**params.alpha * n**params.beta / d**params.gamma
    if params.kind == ModelKind.GRAVITY2:
        return params.scale_c * m * n / d**params.gamma
    if s is None or s < 0:
        raise DomainError("radiation needs a non-negative intervening population s")
    return params.scale_c * m * n / ((m + s) * (m + n + s))


def predict(params: ModelParams, obs: FlowObservation) -> float:
    """Predicted flow for an observation's (m, n, d, s)."""
    return predict_flow(params, obs.m, obs.n, obs.d, obs.s)


def predict_many(
    params: ModelParams, observations: Sequence[FlowObservation]
) -> np.ndarray:
    """Vectorized `predict` over observations."""
    m, n, d, s, _ = _columns(observations, params.kind)
    if params.kind == ModelKind.GRAVITY4:
        return params.scale_c * m**params.alpha * n**params.beta / d**params.gamma
    if params.kind == ModelKind.GRAVITY2:
        return params.scale_c * m * n / d**params.gamma
    return params.scale_c * _radiation_kernel(m, n, s)


def fit(
    kind: ModelKind,
    observations: Sequence[FlowObservation],
    n_excluded_zero_flow: int = 0,
) -> FitResult:
    """
    Least-squares fit in log space.

    gravity4: ln P = ln C + alpha ln m + beta ln n - gamma ln d
    gravity2: ln P - ln m - ln n = ln C - gamma ln d
    radiation: ln C = mean(ln P - ln(mn / ((m+s)(m+n+s))))

    Args:
        kind: Model family
        observations: Pairs with positive observed flow
        n_excluded_zero_flow: Zero-flow pairs dropped upstream, reported only

    Raises:
        FitError: With fewer observations than parameters or a singular
            design matrix
    """
    needed = N_PARAMETERS[kind]
    if len(observations) < needed:
        raise FitError(
            kind.value,
            f"observations < parameters ({len(observations)} < {needed})",
        )

    m, n, d, s, observed = _columns(observations, kind)
    log_p = np.log(observed)

    if kind == ModelKind.RADIATION:
        residual_target = log_p - np.log(_radiation_kernel(m, n, s))
        log_c = float(np.mean(residual_target))
        residuals = residual_target - log_c
        params = ModelParams(kind=kind, scale_c=float(np.exp(log_c)))
        condition = 1.0
    else:
        if kind == ModelKind.GRAVITY4:
            columns = {"ln m": np.log(m), "ln n": np.log(n), "-ln d": -np.log(d)}
            target = log_p
        else:
            columns = {"-ln d": -np.log(d)}
            target = log_p - np.log(m) - np.log(n)

        design = np.column_stack([np.ones_like(target), *columns.values()])
        _check_design(kind, design, list(columns))
        condition = float(np.linalg.cond(design))

        coef, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
        residuals = target - design @ coef

        if kind == ModelKind.GRAVITY4:
            params = ModelParams(
                kind=kind,
                scale_c=float(np.exp(coef[0])),
                alpha=float(coef[1]),
                beta=float(coef[2]),
                gamma=float(coef[3]),
            )
        else:
            params = ModelParams(
                kind=kind, scale_c=float(np.exp(coef[0])), gamma=float(coef[1])
            )

    rss = float(residuals @ residuals)
    logger.info(
        f"Fitted {kind.value} on {len(observations)} pair(s): "
        f"{params.model_dump(exclude_none=True)}, log-space RSS {rss:.6g}"
    )
    return FitResult(
        params=params,
        rss_log=rss,
        n_used=len(observations),
        n_excluded_zero_flow=n_excluded_zero_flow,
        condition_number=condition,
    )


def build_observations(
    flows: FlowMatrix,
    area_set: AreaSet,
    population_source: PopulationSource = PopulationSource.CENSUS,
    population_table: Optional[PopulationTable] = None,
) -> Tuple[List[FlowObservation], int]:
    """
    Model inputs for every ordered off-diagonal area pair with positive flow.

    In twitter mode m, n and s use Twitter user counts, and pairs touching an
    area without users are excluded like zero flows.

    Returns:
        (observations sorted by origin then destination, number of excluded pairs)

    Raises:
        DomainError: If a counted pair joins areas with the same centroid
    """
    populations = _populations(area_set, population_source, population_table)

    observations: List[FlowObservation] = []
    excluded = 0
    for origin in area_set.areas:
        for destination in area_set.areas:
            if origin.name == destination.name:
                continue
            count = flows.counts.get((origin.name, destination.name), 0)
            m, n = populations[origin.name], populations[destination.name]
            if count <= 0 or m <= 0 or n <= 0:
                excluded += 1
                continue
            d = haversine_km(origin.centroid, destination.centroid)
            if d <= 0:
                raise DomainError(
                    f"areas {origin.name!r} and {destination.name!r} share a centroid "
                    f"and carry flow {count}"
                )
            observations.append(
                FlowObservation(
                    origin=origin.name,
                    destination=destination.name,
                    m=m,
                    n=n,
                    d=d,
                    s=compute_s(origin, destination, area_set, populations),
                    observed=count,
                )
            )

    observations.sort(key=lambda o: (o.origin, o.destination))
    if excluded:
        logger.warning(f"Excluded {excluded} pair(s) with zero flow or population")
    return observations, excluded


def _populations(
    area_set: AreaSet,
    source: PopulationSource,
    table: Optional[PopulationTable],
) -> Dict[str, float]:
    if source == PopulationSource.CENSUS:
        return {a.name: float(a.census_population) for a in area_set.areas}
    if table is None:
        raise DomainError("twitter population source needs a population table")
    rows = table.by_name()
    missing = [name for name in area_set.names if name not in rows]
    if missing:
        raise DomainError(f"population table lacks area(s): {', '.join(missing)}")
    return {name: float(rows[name].twitter_users) for name in area_set.names}


def _radiation_kernel(m: np.ndarray, n: np.ndarray, s: np.ndarray) -> np.ndarray:
    return m * n / ((m + s) * (m + n + s))


def _columns(
    observations: Sequence[FlowObservation], kind: ModelKind
) -> Tuple[np.ndarray, ...]:
    m = np.array([o.m for o in observations], dtype=np.float64)
    n = np.array([o.n for o in observations], dtype=np.float64)
    d = np.array([o.d for o in observations], dtype=np.float64)
    observed = np.array([o.observed for o in observations], dtype=np.float64)
    if kind == ModelKind.RADIATION:
        if any(o.s is None for o in observations):
            raise DomainError("radiation needs s on every observation")
        s = np.array([o.s for o in observations], dtype=np.float64)
    else:
        s = np.zeros_like(m)
    return m, n, d, s, observed


def _check_design(kind: ModelKind, design: np.ndarray, names: List[str]) -> None:
    for i, name in enumerate(names, start=1):
        column = design[:, i]
        if np.ptp(column) == 0.0:
            raise FitError(kind.value, f"singular design matrix: {name} has no spread")
    rank = np.linalg.matrix_rank(design)
    if rank < design.shape[1]:
        raise FitError(
            kind.value,
            f"singular design matrix: rank {rank} < {design.shape[1]} "
            f"(collinear columns among {', '.join(names)})",
        )
    condition = np.linalg.cond(design)
    if condition > MAX_CONDITION:
        raise FitError(
            kind.value, f"ill-conditioned design matrix (condition {condition:.3g})"
        )
