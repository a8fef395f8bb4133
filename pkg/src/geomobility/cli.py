"""
Command-line frontend.

    geomobility synth     --out DIR [generator flags]
    geomobility stats     --events FILE --out DIR
    geomobility population --events FILE --areas FILE --out DIR
    geomobility flows     --events FILE --areas FILE --out DIR
    geomobility fit       (--events FILE | --flows FILE) --areas FILE --out DIR
    geomobility evaluate  (--events FILE | --flows FILE) --areas FILE --out DIR
    geomobility pipeline  --events FILE --areas FILE... [--scale SCALE...] --out DIR

With several scales, pipeline writes each scale into its own subdirectory
and the cross-scale comparison into --out.

Exit codes: 0 success, 1 usage, 2 data error, 3 numeric or fit error.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

from eventstream.core import EventFormat
from eventstream.errors import EventStreamError
from eventstream.geo import BoundingBox
from geomobility.activity import DEFAULT_BIN_RATIO, DEFAULT_LOCATION_PRECISION
from geomobility.areas import load_areas
from geomobility.errors import ConfigError, GeoMobilityError, UsageError
from geomobility.formats import comparison_table
from geomobility.models import (
    Layout,
    MetricSpace,
    ModelKind,
    ModelParams,
    PairMode,
    PopulationSource,
    RunConfig,
    ScalePreset,
    SynthConfig,
)
from geomobility.orchestrator import MultiScalePipeline, PipelineOrchestrator

logger = logging.getLogger(__name__)

PROG = "geomobility"
EXIT_INTERRUPTED = 130

# flags copied verbatim onto SynthConfig fields when given
SYNTH_FIELDS = (
    "seed",
    "n_areas",
    "layout",
    "population_min",
    "population_max",
    "min_separation_km",
    "n_users",
    "tweets_exponent",
    "waiting_exponent",
    "waiting_min",
    "waiting_max",
    "stay_probability",
    "spread_km",
    "time_origin",
)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, required=True, help="Output directory")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Diagnostic verbosity on stderr",
    )


def _add_analysis(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--events", type=Path, help="Events file (CSV or JSON lines)")
    parser.add_argument(
        "--event-format",
        type=EventFormat,
        default=EventFormat.AUTO,
        choices=list(EventFormat),
        metavar="{csv,json-lines,auto}",
    )
    parser.add_argument(
        "--areas",
        type=Path,
        nargs="+",
        help="Areas CSV name,lat,lon,population; one shared file or one per scale",
    )
    parser.add_argument(
        "--scale",
        type=ScalePreset,
        nargs="+",
        default=[ScalePreset.NATIONAL],
        choices=list(ScalePreset),
        metavar="{national,state,metro}",
        help="One or more scales; several only with pipeline",
    )
    parser.add_argument(
        "--radius-km",
        type=float,
        nargs="+",
        help="Search radius per scale, overrides the scale preset",
    )
    parser.add_argument(
        "--scale-label", nargs="+", help="Row label per scale in the comparison table"
    )
    parser.add_argument(
        "--bbox",
        type=float,
        nargs=4,
        metavar=("LON_MIN", "LON_MAX", "LAT_MIN", "LAT_MAX"),
        help="Keep only events inside this box",
    )
    parser.add_argument(
        "--pair-mode",
        type=PairMode,
        default=PairMode.STRICT,
        choices=list(PairMode),
        metavar="{strict,resolved}",
    )
    parser.add_argument("--max-gap-hours", type=float, help="Largest time between paired events")
    parser.add_argument(
        "--model",
        default="all",
        choices=[k.value for k in ModelKind] + ["all"],
    )
    parser.add_argument(
        "--space",
        type=MetricSpace,
        default=MetricSpace.LOG,
        choices=list(MetricSpace),
        metavar="{log,linear}",
        help="Space of the model Pearson correlation",
    )
    parser.add_argument(
        "--population-source",
        type=PopulationSource,
        default=PopulationSource.CENSUS,
        choices=list(PopulationSource),
        metavar="{census,twitter}",
    )
    parser.add_argument("--population", type=Path, help="Population CSV from a previous run")
    parser.add_argument("--flows", type=Path, help="Flow CSV origin,destination,count")
    parser.add_argument("--fit-report", type=Path, help="fit_<kind>.json to evaluate")
    parser.add_argument("--bin-ratio", type=float, default=DEFAULT_BIN_RATIO)
    parser.add_argument(
        "--location-precision", type=int, default=DEFAULT_LOCATION_PRECISION
    )
    parser.add_argument(
        "--tail-xmin", type=float, help="Estimate the events-per-user tail above this"
    )


def _add_synth(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int)
    parser.add_argument("--areas", type=Path, help="Use these areas instead of a generated layout")
    parser.add_argument("--n-areas", type=int)
    parser.add_argument(
        "--extent",
        type=float,
        nargs=4,
        metavar=("LON_MIN", "LON_MAX", "LAT_MIN", "LAT_MAX"),
    )
    parser.add_argument(
        "--layout", type=Layout, choices=list(Layout), metavar="{uniform,coastal}"
    )
    parser.add_argument("--population-min", type=int)
    parser.add_argument("--population-max", type=int)
    parser.add_argument("--min-separation-km", type=float)
    parser.add_argument("--radius-km", type=float, help="Intended analysis radius")
    parser.add_argument("--n-users", type=int)
    parser.add_argument("--tweets-exponent", type=float)
    parser.add_argument(
        "--max-events-per-user", type=int, help="Cap on events per user, 0 for none"
    )
    parser.add_argument("--waiting-exponent", type=float)
    parser.add_argument("--waiting-min", type=float, help="Seconds")
    parser.add_argument("--waiting-max", type=float, help="Seconds")
    parser.add_argument(
        "--movement-model",
        type=ModelKind,
        choices=list(ModelKind),
        metavar="{gravity4,gravity2,radiation}",
    )
    parser.add_argument("--movement-c", type=float)
    parser.add_argument("--movement-alpha", type=float)
    parser.add_argument("--movement-beta", type=float)
    parser.add_argument("--movement-gamma", type=float)
    parser.add_argument("--stay-probability", type=float)
    parser.add_argument("--spread-km", type=float)
    parser.add_argument("--time-origin", type=int, help="Epoch seconds")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog=PROG, description="Population and mobility estimation from geo-tagged events"
    )
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    synth = commands.add_parser("synth", help="Generate a synthetic world")
    _add_common(synth)
    _add_synth(synth)

    for name, help_text in (
        ("stats", "Activity summary and distributions"),
        ("population", "Twitter vs census population"),
        ("flows", "Origin-destination flows"),
        ("fit", "Fit spatial-interaction models"),
        ("evaluate", "Evaluate fitted models"),
        ("pipeline", "All stages plus the model comparison table"),
    ):
        sub = commands.add_parser(name, help=help_text)
        _add_common(sub)
        _add_analysis(sub)

    return parser


def run_configs(args: argparse.Namespace) -> List[RunConfig]:
    """
    One RunConfig per requested scale.

    With a single scale the run writes straight into `--out`; with several,
    each scale gets a subdirectory named after its label.

    Raises:
        UsageError: If per-scale flags do not line up with `--scale`
        ConfigError: If an argument is out of range, an input file is missing
            or an output directory is not writable
    """
    scales: List[ScalePreset] = args.scale
    n = len(scales)
    if n > 1 and args.command != "pipeline":
        raise UsageError(f"{args.command} takes a single --scale")
    single_scale = {
        "--flows": args.flows,
        "--population": args.population,
        "--fit-report": args.fit_report,
    }
    if n > 1:
        single = [flag for flag, value in single_scale.items() if value is not None]
        if single:
            raise UsageError(f"{', '.join(single)} cannot be combined with several scales")

    areas = _per_scale(args.areas, n, "--areas", shared=True)
    radii = _per_scale(args.radius_km, n, "--radius-km")
    labels = _per_scale(args.scale_label, n, "--scale-label")

    configs = [
        _run_config(args, scale, area_file, radius, label, args.out)
        for scale, area_file, radius, label in zip(scales, areas, radii, labels)
    ]
    if n > 1:
        configs = [
            c.model_copy(update={"out": args.out / _slug(c.label)}) for c in configs
        ]
        names = [c.out.name for c in configs]
        if len(set(names)) != n:
            raise UsageError(f"scales need distinct labels, got {', '.join(names)}")

    for config in configs:
        for path in config.input_paths():
            if not path.is_file():
                raise ConfigError(f"input file not found: {path}")
    _prepare_out(args.out)
    for config in configs:
        _prepare_out(config.out)
    return configs


def _per_scale(
    values: Optional[List[Any]], n: int, flag: str, shared: bool = False
) -> List[Any]:
    if values is None:
        return [None] * n
    if len(values) == n:
        return list(values)
    if shared and len(values) == 1:
        return list(values) * n
    expected = f"1 or {n}" if shared else str(n)
    raise UsageError(f"{flag} takes {expected} value(s) for {n} scale(s), got {len(values)}")


def _slug(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in label)


def _run_config(
    args: argparse.Namespace,
    scale: ScalePreset,
    areas: Optional[Path],
    radius_km: Optional[float],
    label: Optional[str],
    out: Path,
) -> RunConfig:
    models = list(ModelKind) if args.model == "all" else [ModelKind(args.model)]
    try:
        return RunConfig(
            events=args.events,
            event_format=args.event_format,
            areas=areas,
            flows=args.flows,
            population=args.population,
            fit_report=args.fit_report,
            scale=scale,
            radius_km=radius_km,
            scale_label=label,
            bbox=_bbox(args.bbox),
            pair_mode=args.pair_mode,
            max_gap_hours=args.max_gap_hours,
            models=models,
            space=args.space,
            population_source=args.population_source,
            bin_ratio=args.bin_ratio,
            location_precision=args.location_precision,
            tail_xmin=args.tail_xmin,
            out=out,
        )
    except ValidationError as e:
        raise ConfigError(_first_error(e))


def synth_config(args: argparse.Namespace) -> SynthConfig:
    """
    SynthConfig from parsed synth arguments; unset flags keep the defaults.

    Raises:
        ConfigError: If the flags do not form a valid generator configuration
    """
    values: Dict[str, Any] = {
        field: getattr(args, field)
        for field in SYNTH_FIELDS
        if getattr(args, field) is not None
    }
    if args.extent is not None:
        values["extent"] = _bbox(args.extent)
    if args.max_events_per_user is not None:
        values["max_events_per_user"] = args.max_events_per_user or None
    if args.radius_km is not None:
        values["analysis_radius_km"] = args.radius_km

    try:
        movement = _movement_model(args)
        if movement is not None:
            values["movement_model"] = movement
        if args.areas is not None:
            radius = args.radius_km or ScalePreset.NATIONAL.radius_km
            values["areas"] = load_areas(args.areas, radius)
        config = SynthConfig(**values)
    except ValidationError as e:
        raise ConfigError(_first_error(e))

    _prepare_out(args.out)
    return config


def _movement_model(args: argparse.Namespace) -> Optional[ModelParams]:
    given = [args.movement_c, args.movement_alpha, args.movement_beta, args.movement_gamma]
    if args.movement_model is None and all(v is None for v in given):
        return None
    kind = args.movement_model or ModelKind.GRAVITY2
    exponents: Dict[str, float] = {}
    if kind == ModelKind.GRAVITY4:
        exponents = {"alpha": 1.0, "beta": 1.0, "gamma": 2.0}
    elif kind == ModelKind.GRAVITY2:
        exponents = {"gamma": 2.0}
    for name, value in (
        ("alpha", args.movement_alpha),
        ("beta", args.movement_beta),
        ("gamma", args.movement_gamma),
    ):
        if value is not None:
            exponents[name] = value
    return ModelParams(kind=kind, scale_c=args.movement_c or 1.0, **exponents)


def _bbox(values: Optional[Sequence[float]]) -> Optional[BoundingBox]:
    if values is None:
        return None
    lon_min, lon_max, lat_min, lat_max = values
    try:
        return BoundingBox(lon_min=lon_min, lon_max=lon_max, lat_min=lat_min, lat_max=lat_max)
    except ValidationError as e:
        raise ConfigError(_first_error(e))


def _first_error(e: ValidationError) -> str:
    first = e.errors()[0]
    location = ".".join(str(part) for part in first["loc"])
    return f"{location}: {first['msg']}" if location else first["msg"]


def _prepare_out(out: Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create output directory {out}: {e}")
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory is not writable: {out}")


def setup_logging(level: str) -> None:
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _remove_partial(paths: List[Path]) -> None:
    for path in paths:
        try:
            path.unlink(missing_ok=True)
        except OSError as e:
            logger.warning(f"Could not remove partial output {path}: {e}")


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name, sys.argv[1:] by default

    Returns:
        Process exit status
    """
    stderr = Console(stderr=True)
    orchestrator: Optional[Union[PipelineOrchestrator, MultiScalePipeline]] = None
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.log_level)

        if args.command == "synth":
            config = synth_config(args)
            orchestrator = PipelineOrchestrator(RunConfig(out=args.out))
            orchestrator.synth(config)
        else:
            configs = run_configs(args)
            if len(configs) > 1:
                orchestrator = MultiScalePipeline(configs, args.out)
            else:
                orchestrator = PipelineOrchestrator(configs[0])
            if args.command == "pipeline":
                comparison = orchestrator.pipeline()
                Console().print(comparison_table(comparison))
            else:
                getattr(orchestrator, args.command)()

        logger.info(f"Wrote {len(orchestrator.written)} file(s) to {args.out}")
        return 0

    except (GeoMobilityError, EventStreamError, ValidationError) as e:
        if orchestrator is not None:
            _remove_partial(orchestrator.written)
        code = getattr(e, "exit_code", ConfigError.exit_code)
        message = _first_error(e) if isinstance(e, ValidationError) else str(e)
        stderr.print(f"{PROG}: error: {escape(message)}", highlight=False, soft_wrap=True)
        return code

    except KeyboardInterrupt:
        if orchestrator is not None:
            _remove_partial(orchestrator.written)
        stderr.print(f"{PROG}: interrupted", highlight=False)
        return EXIT_INTERRUPTED


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
