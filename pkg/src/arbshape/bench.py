"""Deformation-accuracy and timing protocols, with CSV reports.

Accuracy: every dataset image is deformed, described and matched against the
undeformed index; a query is a hit only when its top-ranked entry (ties
broken by id) is its own source. Timing: mean/median seconds to describe one
image, and to compare one descriptor pair.
"""

from __future__ import annotations

import csv
import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import deform
from .deform import DeformationSpec, Kind, level_suite
from .errors import ConfigError, DegenerateShape, EmptyShape, OutOfFrame, VanishedShape
from .match import DescriptorIndex, nearest

log = logging.getLogger(__name__)

ACCURACY_HEADER = ["method", "kind", "level", "attempted", "skipped", "misses", "error_percent"]
TIMING_HEADER = ["method", "train_iters", "match_iters", "train_mean_s", "train_median_s", "match_mean_s", "match_median_s"]
PROJECTION_HEADER = ["method", "dataset_size", "total_ms"]

# per-query failures that are recorded rather than raised
SKIPPABLE = (VanishedShape, OutOfFrame, EmptyShape, DegenerateShape)


def _g(x: float) -> str:
    return format(float(x), ".17g")


@dataclass
class LevelResult:
    kind: Kind
    level: int
    attempted: int = 0
    skipped: int = 0
    misses: int = 0

    @property
    def evaluated(self) -> int:
        return self.attempted - self.skipped

    @property
    def error_percent(self) -> float:
        if self.evaluated == 0:
            return math.nan
        return 100.0 * self.misses / self.evaluated


@dataclass
class AccuracyReport:
    method: str
    rows: list = field(default_factory=list)  # LevelResult, ordered by kind then level

    def kinds(self):
        seen = []
        for r in self.rows:
            if r.kind not in seen:
                seen.append(r.kind)
        return seen

    def level(self, kind, level: int) -> LevelResult:
        kind = Kind(kind)
        for r in self.rows:
            if r.kind is kind and r.level == level:
                return r
        raise KeyError((kind, level))

    def average(self, kind) -> float:
        """Mean of the per-level error percentages for ``kind``."""
        kind = Kind(kind)
        vals = [r.error_percent for r in self.rows if r.kind is kind]
        return sum(vals) / len(vals) if vals else math.nan

    def to_rows(self):
        return [
            [self.method, r.kind.value, r.level, r.attempted, r.skipped, r.misses, _g(r.error_percent)]
            for r in self.rows
        ]


@dataclass
class TimingReport:
    method: str
    train_iters: int
    match_iters: int
    train_samples: list
    match_samples: list

    @property
    def train_time(self) -> float:
        return statistics.fmean(self.train_samples)

    @property
    def match_time(self) -> float:
        return statistics.fmean(self.match_samples)

    @property
    def train_median(self) -> float:
        return statistics.median(self.train_samples)

    @property
    def match_median(self) -> float:
        return statistics.median(self.match_samples)

    def retrieval_projection(self, n: int) -> float:
        """Seconds to describe one query and compare it against ``n`` descriptors."""
        return self.train_time + n * self.match_time

    def to_row(self):
        return [
            self.method, self.train_iters, self.match_iters,
            _g(self.train_time), _g(self.train_median), _g(self.match_time), _g(self.match_median),
        ]


# ---------------------------------------------------------------------------
# Accuracy

def build_index(dataset, method) -> DescriptorIndex:
    return DescriptorIndex(method.tag, tuple((ident, method.describe(img)) for ident, img in dataset))


def _suite(kinds, max_level: int):
    return [spec for k in kinds for spec in level_suite(k, max_level)]


def _query_outcomes(args):
    """Hit/miss/skip per spec for one source image (top-level for process pools)."""
    ident, img, method, index, specs = args
    out = []
    for spec in specs:
        try:
            q = method.describe(deform.apply(img, spec))
        except SKIPPABLE as exc:
            log.debug("skipping %s on %s: %s", spec, ident, exc)
            out.append("skip")
            continue
        top = nearest(q, index, 1, method.distance)[0][0]
        out.append("hit" if top == ident else "miss")
    return out


def run_accuracy(dataset, method, kinds, max_level: int, workers: int = 1) -> AccuracyReport:
    if len(dataset) < 2:
        raise ConfigError("accuracy runs need at least 2 dataset entries")
    kinds = [Kind(k) for k in kinds]
    specs = _suite(kinds, max_level)
    entries = sorted(dataset, key=lambda e: e[0])
    index = build_index(entries, method)

    jobs = [(ident, img, method, index, specs) for ident, img in entries]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_query_outcomes, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        outcomes = [_query_outcomes(j) for j in jobs]

    results = {(k, lvl): LevelResult(k, lvl) for k in kinds for lvl in range(1, max_level + 1)}
    for per_image in outcomes:
        for spec, outcome in zip(specs, per_image):
            r = results[(spec.kind, spec.level)]
            r.attempted += 1
            if outcome == "skip":
                r.skipped += 1
            elif outcome == "miss":
                r.misses += 1
    return AccuracyReport(method.tag, [results[(k, lvl)] for k in kinds for lvl in range(1, max_level + 1)])


# ---------------------------------------------------------------------------
# Timing

def match_pairs(n: int, count: int):
    """Deterministic cycle over all ordered pairs (i, j), i != j, truncated/repeated to ``count``."""
    if n < 2:
        return [(0, 0)] * count
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    return [pairs[t % len(pairs)] for t in range(count)]


def run_timing(dataset, method, train_iters: int = 100, match_iters: int = 10000, clock=time.perf_counter_ns) -> TimingReport:
    """Single-threaded timing of descriptor construction and pair comparison."""
    if len(dataset) == 0:
        raise ConfigError("timing needs a non-empty dataset")
    if train_iters < 1 or match_iters < 1:
        raise ConfigError("iteration counts must be >= 1")
    images = [img for _, img in sorted(dataset, key=lambda e: e[0])]
    describe = method.describe
    train = []
    descriptors = []
    for img in images:
        for _ in range(train_iters):
            t0 = clock()
            d = describe(img)
            train.append((clock() - t0) / 1e9)
        descriptors.append(d)

    distance = method.distance
    match = []
    for i, j in match_pairs(len(descriptors), match_iters):
        a, b = descriptors[i], descriptors[j]
        t0 = clock()
        distance(a, b)
        match.append((clock() - t0) / 1e9)
    # a zero reading means the clock did not tick; floor at one nanosecond
    train = [max(t, 1e-9) for t in train]
    match = [max(t, 1e-9) for t in match]
    return TimingReport(method.tag, train_iters, match_iters, train, match)


# ---------------------------------------------------------------------------
# CSV

def _write(path, header, rows):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit_report(report, path) -> None:
    """Write an accuracy report, a timing report, or a sequence of either."""
    reports = report if isinstance(report, (list, tuple)) else [report]
    if reports and all(isinstance(r, TimingReport) for r in reports):
        _write(path, TIMING_HEADER, [r.to_row() for r in reports])
    elif all(isinstance(r, AccuracyReport) for r in reports):
        _write(path, ACCURACY_HEADER, [row for r in reports for row in r.to_rows()])
    else:
        raise ConfigError("cannot mix accuracy and timing reports in one CSV")


def emit_projection(reports, sizes, path) -> None:
    rows = [[r.method, n, _g(r.retrieval_projection(n) * 1e3)] for r in reports for n in sizes]
    _write(path, PROJECTION_HEADER, rows)


def _read(path, header):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        got = next(reader, None)
        if got != header:
            raise ConfigError(f"{path}: unexpected header {got}")
        return list(reader)


def read_accuracy(path):
    """Reports keyed by method, in file order."""
    out = {}
    for method, kind, level, attempted, skipped, misses, err in _read(path, ACCURACY_HEADER):
        rep = out.setdefault(method, AccuracyReport(method))
        r = LevelResult(Kind(kind), int(level), int(attempted), int(skipped), int(misses))
        stored = float(err)
        if not (math.isnan(stored) and math.isnan(r.error_percent)) and stored != r.error_percent:
            raise ConfigError(f"{path}: error_percent {err} disagrees with counts for {method} {kind} {level}")
        rep.rows.append(r)
    return out


def read_timing(path):
    """Rows as dicts with typed values (samples are not persisted)."""
    rows = []
    for m, ti, mi, tm, tmed, mm, mmed in _read(path, TIMING_HEADER):
        rows.append({
            "method": m, "train_iters": int(ti), "match_iters": int(mi),
            "train_mean_s": float(tm), "train_median_s": float(tmed),
            "match_mean_s": float(mm), "match_median_s": float(mmed),
        })
    return rows


def read_projection(path):
    return [{"method": m, "dataset_size": int(n), "total_ms": float(t)} for m, n, t in _read(path, PROJECTION_HEADER)]


def deformation_specs(kinds, max_level):
    """Flattened suite, handy for callers that write deformed images."""
    return _suite([Kind(k) for k in kinds], max_level)


__all__ = [
    "AccuracyReport", "TimingReport", "LevelResult", "DeformationSpec",
    "run_accuracy", "run_timing", "emit_report", "emit_projection",
    "read_accuracy", "read_timing", "read_projection", "match_pairs", "build_index",
]
