"""
Pipeline orchestrator.

This module wires the stages together: it loads inputs once, shares the
event -> area assignment between population and flow extraction, writes
every stage's outputs into the run directory and records the files it
wrote so a failed run can be cleaned up.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from geomobility import formats
from geomobility.activity import (
    distribution_points,
    estimate_tail_exponent,
    events_per_user_distribution,
    frequency_of,
    log_bin,
    summarize,
    waiting_time_distribution,
)
from geomobility.areas import (
    assign_timelines,
    extract_population,
    load_areas,
    mean_pairwise_distance_km,
    resolve_radius,
)
from geomobility.errors import ConfigError, EmptyInputError
from geomobility.evaluation import (
    compare_models,
    compare_populations,
    evaluate_model,
    pool_tables,
)
from geomobility.ingest import build_timelines, filter_bbox, parse_events
from geomobility.interaction import build_observations, fit
from geomobility.mobility import extract_flows, offdiagonal
from geomobility.models import (
    ActivitySummary,
    AreaSet,
    EvalReport,
    FitResult,
    FlowMatrix,
    FlowObservation,
    ModelComparison,
    ModelKind,
    PopulationComparison,
    PopulationSource,
    PopulationTable,
    RunConfig,
    SynthConfig,
    UserTimeline,
)
from geomobility.synth import generate, world_areas

logger = logging.getLogger(__name__)


class PipelineOrchestrator:
    """
    High-level interface over the estimation pipeline for one run.

    Each stage method computes its result, writes its files into
    `config.out` and returns the result. Inputs are loaded lazily and cached.
    """

    def __init__(
        self, config: RunConfig, timelines: Optional[List[UserTimeline]] = None
    ):
        """
        Initialize the orchestrator.

        Args:
            config: Validated run configuration
            timelines: Already built timelines, read from `config.events` if None
        """
        self.config = config
        self.written: List[Path] = []

        self._timelines: Optional[List[UserTimeline]] = timelines
        self._area_set: Optional[AreaSet] = None
        self._assignments: Optional[List[np.ndarray]] = None
        self._population: Optional[PopulationTable] = None
        self._flows: Optional[FlowMatrix] = None
        self._fits: Dict[ModelKind, FitResult] = {}

    # Inputs

    def _require(self, path: Optional[Path], flag: str) -> Path:
        if path is None:
            raise ConfigError(f"{flag} is required for this command")
        return path

    @property
    def timelines(self) -> List[UserTimeline]:
        if self._timelines is None:
            path = self._require(self.config.events, "--events")
            parsed = parse_events(path, self.config.event_format)
            events = parsed.events
            if self.config.bbox is not None:
                events = filter_bbox(events, self.config.bbox)
            if not events:
                raise EmptyInputError(f"no usable events in {path}")
            self._timelines = build_timelines(events)
        return self._timelines

    @property
    def area_set(self) -> AreaSet:
        if self._area_set is None:
            radius = resolve_radius(self.config.scale, self.config.radius_km)
            self._area_set = load_areas(
                self._require(self.config.areas, "--areas"), radius
            )
            logger.info(
                f"{len(self._area_set)} area(s), mean separation "
                f"{mean_pairwise_distance_km(self._area_set):.1f} km"
            )
        return self._area_set

    @property
    def assignments(self) -> List[np.ndarray]:
        if self._assignments is None:
            self._assignments = assign_timelines(self.timelines, self.area_set)
        return self._assignments

    def _emit(self, *paths: Path) -> None:
        self.written.extend(paths)

    def _path(self, name: str) -> Path:
        return self.config.out / name

    # Stages

    def stats(self) -> ActivitySummary:
        """Activity summary plus binned events-per-user and waiting-time distributions."""
        timelines = self.timelines
        summary = summarize(timelines, self.config.location_precision)
        per_user = events_per_user_distribution(timelines)

        if self.config.tail_xmin is not None:
            sizes = [len(t) for t in timelines]
            summary = summary.model_copy(
                update={
                    "tail_exponent": estimate_tail_exponent(sizes, self.config.tail_xmin)
                }
            )

        waits = frequency_of(waiting_time_distribution(timelines))
        self._emit(
            formats.write_json(summary, self._path("activity_summary.json")),
            formats.write_binned(
                log_bin(distribution_points(per_user), self.config.bin_ratio),
                self._path("events_per_user.csv"),
            ),
            formats.write_binned(
                log_bin(distribution_points(waits), self.config.bin_ratio),
                self._path("waiting_times.csv"),
            ),
        )
        logger.info(
            f"{summary.n_users} user(s), {summary.avg_events_per_user:.1f} event(s) "
            f"per user, {summary.avg_waiting_time_hours:.1f} h average wait"
        )
        return summary

    def population(self) -> Tuple[PopulationTable, PopulationComparison]:
        """Twitter population per area and its comparison with census."""
        table = self.population_table()
        comparison = compare_populations(table)
        self._emit(
            formats.write_population(table, self._path("population.csv")),
            formats.write_json(comparison, self._path("population_comparison.json")),
        )
        return table, comparison

    def population_table(self) -> PopulationTable:
        if self._population is None:
            if self.config.population is not None:
                self._population = formats.load_population(self.config.population)
            else:
                self._population = extract_population(
                    self.timelines, self.area_set, self.assignments
                )
        return self._population

    def flows(self) -> FlowMatrix:
        """Extract the full flow matrix, diagonal included, and write it."""
        flows = self._extracted_flows()
        self._emit(
            formats.write_flows(flows, self._path("flows.csv")),
            formats.write_json(
                formats.flows_summary(flows), self._path("flows_summary.json")
            ),
        )
        return flows

    def _extracted_flows(self) -> FlowMatrix:
        if self._flows is None:
            if self.config.flows is not None:
                self._flows = formats.load_flows(self.config.flows, self.area_set)
            else:
                self._flows = extract_flows(
                    self.timelines,
                    self.area_set,
                    self.config.pair_mode,
                    self.config.max_gap_seconds,
                    self.assignments,
                )
        return self._flows

    def observations(self) -> Tuple[List[FlowObservation], int]:
        table = None
        if self.config.population_source == PopulationSource.TWITTER:
            table = self.population_table()
        return build_observations(
            offdiagonal(self._extracted_flows()),
            self.area_set,
            self.config.population_source,
            table,
        )

    def fit(self) -> Dict[ModelKind, FitResult]:
        """Fit every requested model and write `fit_<kind>.json`."""
        observations, excluded = self.observations()
        for kind in self.config.models:
            result = fit(kind, observations, excluded)
            self._fits[kind] = result
            self._emit(formats.write_json(result, self._path(f"fit_{kind.value}.json")))
        return dict(self._fits)

    def evaluate(self) -> Dict[ModelKind, EvalReport]:
        """
        Evaluate every requested model.

        Parameters come from an earlier fit in this run, a `--fit-report`
        file, or a fresh fit.
        """
        observations, _ = self.observations()
        if not observations:
            raise EmptyInputError("no off-diagonal pairs with positive flow")

        reports: Dict[ModelKind, EvalReport] = {}
        for kind in self.config.models:
            result = self._fit_for(kind, observations)
            report = evaluate_model(
                result.params, observations, self.config.space, self.config.bin_ratio
            )
            reports[kind] = report
            self._emit(
                formats.write_json(report, self._path(f"eval_{kind.value}.json")),
                formats.write_binned(
                    report.binned_scatter,
                    self._path(f"scatter_{kind.value}.csv"),
                    scatter=True,
                ),
            )
        return reports

    def _fit_for(
        self, kind: ModelKind, observations: List[FlowObservation]
    ) -> FitResult:
        if kind in self._fits:
            return self._fits[kind]
        if self.config.fit_report is not None:
            result = FitResult.model_validate(formats.read_json(self.config.fit_report))
            if result.params.kind == kind:
                return result
            if len(self.config.models) == 1:
                raise ConfigError(
                    f"fit report {self.config.fit_report} holds "
                    f"{result.params.kind.value}, not {kind.value}"
                )
        return fit(kind, observations)

    def run_stages(self) -> Dict[ModelKind, EvalReport]:
        """Every stage in order; returns the evaluation reports."""
        self.stats()
        self.population()
        self.flows()
        self.fit()
        return self.evaluate()

    def pipeline(self) -> ModelComparison:
        """Every stage in order plus the models comparison table."""
        reports = self.run_stages()
        comparison = compare_models(
            {self.config.label: list(reports.values())}, self.config.space
        )
        self._emit(*formats.write_comparison(comparison, self.config.out))
        return comparison

    def synth(self, synth_config: SynthConfig) -> AreaSet:
        """Generate a synthetic world and write events, areas and truth."""
        events, truth = generate(synth_config)
        area_set = world_areas(synth_config)
        self._emit(formats.write_events(events, self._path("events.csv")))
        self._emit(formats.write_areas(area_set, self._path("areas.csv")))
        self._emit(formats.write_truth(truth, self._path("truth.json")))
        return area_set


class MultiScalePipeline:
    """
    The full pipeline at several scales over one event stream.

    Every scale runs in its own orchestrator writing into its own directory.
    Timelines are parsed once and shared. The top-level directory gets the
    scales x models comparison and the population comparison pooled over
    every scale's areas.
    """

    def __init__(self, configs: List[RunConfig], out: Path):
        labels = [c.label for c in configs]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"scale labels must be unique, got {', '.join(labels)}")
        self.configs = configs
        self.out = out
        self.orchestrators: List[PipelineOrchestrator] = []
        self._written: List[Path] = []

    @property
    def written(self) -> List[Path]:
        paths = [p for o in self.orchestrators for p in o.written]
        return paths + self._written

    def pipeline(self) -> ModelComparison:
        reports: Dict[str, List[EvalReport]] = {}
        tables: Dict[str, PopulationTable] = {}
        timelines: Optional[List[UserTimeline]] = None
        for config in self.configs:
            orchestrator = PipelineOrchestrator(config, timelines)
            self.orchestrators.append(orchestrator)
            logger.info(f"Running scale {config.label!r} into {config.out}")
            reports[config.label] = list(orchestrator.run_stages().values())
            tables[config.label] = orchestrator.population_table()
            timelines = orchestrator.timelines

        space = self.configs[0].space
        comparison = compare_models(reports, space)
        pooled = compare_populations(pool_tables(tables))
        self._written.extend(formats.write_comparison(comparison, self.out))
        self._written.append(
            formats.write_json(pooled, self.out / "population_pooled.json")
        )
        logger.info(
            f"Pooled population over {len(pooled.pairs)} area(s): "
            f"pearson {pooled.pearson:.3f}"
        )
        return comparison
