"""Performance-regression harness: a twenty-query suite, a timed full
reload, and an indexed-vs-scan speedup probe.

Thresholds live in configuration, not code; the shipped defaults target a
one-million-row edition on desk hardware."""

from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

from .catalog.store import Catalog, EditionView
from .sphere import Cone
from .wire import TabularDocument

CATEGORIES = ("spatial", "photometric", "join", "workspace")
SUITE_SIZE = 20
MIN_SPATIAL_FRACTION = 0.25
DEFAULT_QUERY_THRESHOLD_MS = 1_000.0
DEFAULT_RELOAD_THRESHOLD_S = 300.0


class BenchError(ValueError):
    pass


@dataclass(frozen=True)
class BenchQuery:
    id: int
    text: str
    category: str
    threshold_ms: float = DEFAULT_QUERY_THRESHOLD_MS

    def __post_init__(self):
        if not 1 <= self.id <= SUITE_SIZE:
            raise BenchError(f"query id {self.id} outside 1..{SUITE_SIZE}")
        if self.category not in CATEGORIES:
            raise BenchError(f"unknown category {self.category!r}")


@dataclass(frozen=True)
class QueryTiming:
    id: int
    category: str
    elapsed_ms: float
    rows: int
    passed: bool


@dataclass(frozen=True)
class BenchReport:
    timings: tuple[QueryTiming, ...]
    reload_elapsed_s: float | None = None
    reload_passed: bool = True

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.timings) and self.reload_passed

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "category", "elapsed_ms", "rows", "pass"])
        for t in self.timings:
            w.writerow([t.id, t.category, t.elapsed_ms, t.rows, int(t.passed)])
        if self.reload_elapsed_s is not None:
            w.writerow(["reload", "", self.reload_elapsed_s * 1000.0, "", int(self.reload_passed)])
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"{'id':>6}  {'category':<12} {'ms':>10} {'rows':>8}  result"]
        for t in self.timings:
            lines.append(
                f"{t.id:>6}  {t.category:<12} {t.elapsed_ms:>10.2f} {t.rows:>8}  "
                + ("pass" if t.passed else "FAIL")
            )
        if self.reload_elapsed_s is not None:
            lines.append(
                f"reload: {self.reload_elapsed_s:.2f} s "
                + ("pass" if self.reload_passed else "FAIL")
            )
        lines.append("overall: " + ("pass" if self.passed else "FAIL"))
        return "\n".join(lines)


def validate_suite(queries: Iterable[BenchQuery]) -> tuple[BenchQuery, ...]:
    qs = tuple(sorted(queries, key=lambda q: q.id))
    if len(qs) != SUITE_SIZE:
        raise BenchError(f"suite must hold exactly {SUITE_SIZE} queries, got {len(qs)}")
    if len({q.id for q in qs}) != SUITE_SIZE:
        raise BenchError("duplicate query ids")
    spatial = sum(1 for q in qs if q.category == "spatial")
    if spatial < MIN_SPATIAL_FRACTION * SUITE_SIZE:
        raise BenchError(
            f"suite needs at least {int(MIN_SPATIAL_FRACTION * SUITE_SIZE)} "
            f"spatial queries, got {spatial}"
        )
    return qs


def load_suite(path: str | Path | None = None) -> tuple[BenchQuery, ...]:
    """Suite from a TOML file; with no path, the bundled default suite."""
    if path is None:
        text = resources.files("skyfed.data").joinpath("bench_suite.toml").read_text()
    else:
        text = Path(path).read_text()
    obj = tomli.loads(text)
    return validate_suite(
        BenchQuery(
            id=q["id"],
            text=q["text"],
            category=q["category"],
            threshold_ms=float(q.get("threshold_ms", DEFAULT_QUERY_THRESHOLD_MS)),
        )
        for q in obj.get("query", ())
    )


QueryFn = Callable[[str], TabularDocument]


def run_suite(
    queries: Iterable[BenchQuery],
    query_fn: QueryFn,
    clock: Callable[[], float] = time.perf_counter,
) -> BenchReport:
    """Time each query once after a discarded warm-up run. A query that
    returns an error document fails regardless of timing."""
    timings = []
    for q in validate_suite(queries):
        query_fn(q.text)  # warm-up, discarded
        t0 = clock()
        doc = query_fn(q.text)
        elapsed_ms = (clock() - t0) * 1000.0
        ok = doc.status == "ok" and elapsed_ms <= q.threshold_ms
        timings.append(
            QueryTiming(q.id, q.category, elapsed_ms, doc.rows_emitted, ok)
        )
    return BenchReport(timings=tuple(timings))


def run_reload_check(
    catalog: Catalog,
    data: Mapping[str, object],
    threshold_s: float = DEFAULT_RELOAD_THRESHOLD_S,
    clock: Callable[[], float] = time.perf_counter,
) -> tuple[float, bool]:
    """Timed full load of the given table streams into a fresh edition."""
    t0 = clock()
    catalog.load_tables(data)
    elapsed = clock() - t0
    return elapsed, elapsed < threshold_s


def index_speedup_check(
    catalog: Catalog,
    edition: EditionView,
    table: str,
    cones: Iterable[Cone],
    clock: Callable[[], float] = time.perf_counter,
) -> float:
    """Median per-cone time of the forced full scan over the indexed route.

    Both routes must return identical row sets; a mismatch is an error, not
    a slow result."""
    tdata = edition.table(table)
    indexed_times = []
    scan_times = []
    for cone in cones:
        t0 = clock()
        via_index = catalog.cone_indices(tdata, cone)
        indexed_times.append(clock() - t0)
        t0 = clock()
        via_scan = catalog.scan_cone_indices(tdata, cone)
        scan_times.append(clock() - t0)
        if not np.array_equal(np.sort(via_index), np.sort(via_scan)):
            raise BenchError(f"index and scan disagree for cone {cone}")
    return statistics.median(scan_times) / statistics.median(indexed_times)
