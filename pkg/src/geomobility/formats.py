"""
File emitters and loaders.

This module writes every artifact the pipeline produces (events, areas,
flows, population tables, binned distributions, JSON reports) and reads
back the ones later stages consume. Writers are deterministic: rows are
sorted or kept in registry order, floats use repr and JSON keys are sorted,
so a rerun on the same inputs produces byte-identical files.
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, BinaryIO, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel
from rich.console import Console
from rich.table import Table

from eventstream.core import EventFormat
from eventstream.parsers import CsvEventParser
from geomobility.errors import LoadError
from geomobility.models import (
    AreaSet,
    BinnedDistribution,
    EventRecord,
    FlowMatrix,
    ModelComparison,
    PopulationRow,
    PopulationTable,
    SynthTruth,
)

logger = logging.getLogger(__name__)

Source = Union[BinaryIO, Path, str]

FLOWS_HEADER = ["origin", "destination", "count"]
POPULATION_HEADER = ["name", "census_population", "twitter_users", "twitter_events"]
DISTRIBUTION_HEADER = ["x", "y_mean", "count"]
SCATTER_HEADER = ["x_model", "y_observed_mean", "count"]


def _source_name(source: Source) -> Optional[str]:
    if isinstance(source, (str, Path)):
        return str(source)
    return getattr(source, "name", None)


def read_table(
    source: Source, header: Sequence[str], what: str
) -> Iterator[Tuple[int, List[str]]]:
    """
    Yield (row number, cells) of a headed CSV, skipping blank rows.

    The header is row 1, so the first data row is row 2.

    Raises:
        LoadError: If the source cannot be read, the header differs or a row
            has the wrong number of columns
    """
    name = _source_name(source)
    try:
        if isinstance(source, (str, Path)):
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = source.read().decode("utf-8")
    except (OSError, UnicodeDecodeError) as e:
        logger.error(f"Cannot read {what} file {name}: {e}")
        raise LoadError(f"Cannot read {what} file: {e}", source=name)

    reader = csv.reader(io.StringIO(text))
    first = next(reader, None)
    if first is None or [h.strip() for h in first] != list(header):
        raise LoadError(f"Expected header {','.join(header)}", row=1, source=name)

    for row_number, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != len(header):
            raise LoadError(f"Expected {len(header)} columns", row_number, name)
        yield row_number, [cell.strip() for cell in row]


def _parse_count(raw: str, label: str, row_number: int, name: Optional[str]) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise LoadError(f"Invalid {label} {raw!r}", row_number, name)
    if value < 0:
        raise LoadError(f"Negative {label} {value}", row_number, name)
    return value


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    logger.debug(f"Wrote {len(rows)} row(s) to {path}")
    return path


# Events


def write_events(
    events: Sequence[EventRecord], path: Path, fmt: EventFormat = EventFormat.CSV
) -> Path:
    """
    Write events in input order as CSV or JSON-lines.

    Coordinates are written with repr so parsing the file yields the same
    floats.
    """
    if fmt == EventFormat.JSONL:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            for e in events:
                record = {
                    "user_id": e.user_id,
                    "timestamp": e.timestamp,
                    "lat": e.location.lat,
                    "lon": e.location.lon,
                }
                handle.write(json.dumps(record) + "\n")
        return path

    return _write_csv(
        path,
        CsvEventParser.HEADER.split(","),
        [(e.user_id, e.timestamp, repr(e.location.lat), repr(e.location.lon)) for e in events],
    )


# Areas


def write_areas(area_set: AreaSet, path: Path) -> Path:
    """Areas CSV in registry order (`name,lat,lon,population`)."""
    return _write_csv(
        path,
        ["name", "lat", "lon", "population"],
        [
            (a.name, repr(a.centroid.lat), repr(a.centroid.lon), a.census_population)
            for a in area_set.areas
        ],
    )


# Flows


def write_flows(flows: FlowMatrix, path: Path) -> Path:
    """Flow CSV sorted by (origin, destination)."""
    return _write_csv(path, FLOWS_HEADER, flows.to_rows())


def load_flows(source: Source, area_set: AreaSet) -> FlowMatrix:
    """
    Read a flow CSV `origin,destination,count`.

    The loaded matrix has no uncounted pairs, so n_pairs_total is the sum of
    the counts.

    Raises:
        LoadError: On an unknown area, negative or invalid count, or repeated
            pair, naming the offending row
    """
    name = _source_name(source)
    counts: Dict[Tuple[str, str], int] = {}
    for row_number, (origin, destination, raw_count) in read_table(
        source, FLOWS_HEADER, "flows"
    ):
        for area in (origin, destination):
            if area not in area_set.index:
                raise LoadError(f"Unknown area {area!r}", row_number, name)
        key = (origin, destination)
        if key in counts:
            raise LoadError(f"Repeated pair {origin}->{destination}", row_number, name)
        counts[key] = _parse_count(raw_count, "count", row_number, name)

    logger.info(f"Loaded {len(counts)} flow entr(ies) from {name}")
    return FlowMatrix(counts=counts, n_pairs_total=sum(counts.values()))


def flows_summary(flows: FlowMatrix) -> Dict[str, int]:
    return {
        "n_entries": len(flows.counts),
        "n_pairs_total": flows.n_pairs_total,
        "n_pairs_counted": sum(flows.counts.values()),
        "n_pairs_unresolved": flows.n_pairs_unresolved,
        "n_pairs_gap_exceeded": flows.n_pairs_gap_exceeded,
        "n_pairs_diagonal_removed": flows.n_pairs_diagonal_removed,
        "diagonal_total": flows.diagonal_total,
        "offdiagonal_total": flows.offdiagonal_total,
    }


# Population


def write_population(table: PopulationTable, path: Path) -> Path:
    return _write_csv(
        path,
        POPULATION_HEADER,
        [
            (r.name, r.census_population, r.twitter_users, r.twitter_events)
            for r in table.rows
        ],
    )


def load_population(source: Source) -> PopulationTable:
    """
    Read a population CSV written by `write_population`.

    Raises:
        LoadError: On invalid counts or rows with more users than events
    """
    name = _source_name(source)
    rows: List[PopulationRow] = []
    for row_number, (area, census, users, events) in read_table(
        source, POPULATION_HEADER, "population"
    ):
        census_population = _parse_count(census, "census population", row_number, name)
        twitter_users = _parse_count(users, "user count", row_number, name)
        twitter_events = _parse_count(events, "event count", row_number, name)
        try:
            rows.append(
                PopulationRow(
                    name=area,
                    census_population=census_population,
                    twitter_users=twitter_users,
                    twitter_events=twitter_events,
                )
            )
        except ValueError as e:
            raise LoadError(f"Invalid population row: {e}", row_number, name)
    return PopulationTable(rows=rows)


# Distributions


def write_binned(
    distribution: BinnedDistribution, path: Path, scatter: bool = False
) -> Path:
    """Binned distribution CSV; scatter files use the model/observed header."""
    return _write_csv(
        path,
        SCATTER_HEADER if scatter else DISTRIBUTION_HEADER,
        [(repr(b.x), repr(b.y_mean), b.count) for b in distribution.bins],
    )


# JSON


def to_jsonable(value: Any) -> Any:
    """Plain JSON data; tuple-keyed mappings become sorted row lists."""
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump(mode="python"))
    if isinstance(value, dict):
        if any(isinstance(k, tuple) for k in value):
            return [[*k, to_jsonable(v)] for k, v in sorted(value.items())]
        return {str(getattr(k, "value", k)): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return getattr(value, "value", value)


def write_json(data: Any, path: Path) -> Path:
    """Indented JSON with sorted keys and a trailing newline."""
    text = json.dumps(to_jsonable(data), sort_keys=True, indent=2, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")
    logger.debug(f"Wrote {path}")
    return path


def write_truth(truth: SynthTruth, path: Path) -> Path:
    """Synthetic ground truth; movements become [origin, destination, count] rows."""
    return write_json(truth, path)


def read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise LoadError(f"Cannot read JSON file: {e}", source=str(path))


# Comparison table

COMPARISON_WIDTH = 100


def comparison_table(comparison: ModelComparison) -> Table:
    """Scales x models table of Pearson (upper) and HitRate@50% (lower)."""
    kinds = [cell.kind for cell in comparison.rows[0].cells] if comparison.rows else []
    table = Table(
        title=f"Model comparison (Pearson in {comparison.pearson_space.value} space)"
    )
    table.add_column("scale")
    table.add_column("metric")
    for kind in kinds:
        table.add_column(kind.value, justify="right")

    for row in comparison.rows:
        table.add_row(
            row.label,
            "pearson",
            *(_mark(c.pearson, c.best_pearson) for c in row.cells),
        )
        table.add_row(
            "",
            "hitrate50",
            *(_mark(c.hitrate50, c.best_hitrate50) for c in row.cells),
            end_section=True,
        )
    return table


def _mark(value: float, best: bool) -> str:
    return f"{value:.3f}*" if best else f"{value:.3f}"


def render_comparison(comparison: ModelComparison) -> str:
    """Plain aligned text of `comparison_table`, best values starred."""
    buffer = io.StringIO()
    console = Console(
        file=buffer, width=COMPARISON_WIDTH, color_system=None, force_terminal=False
    )
    console.print(comparison_table(comparison))
    return buffer.getvalue()


def write_comparison(comparison: ModelComparison, directory: Path) -> List[Path]:
    """comparison.json and comparison.txt."""
    text_path = directory / "comparison.txt"
    text_path.write_text(render_comparison(comparison), encoding="utf-8")
    return [write_json(comparison, directory / "comparison.json"), text_path]
