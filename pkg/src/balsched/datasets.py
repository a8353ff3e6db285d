"""Job pools from a synthetic generator and from the two real-data sources.

Bus driver data: one job per bus line, cost = summed running time in minutes.
Course logs: one job per (course, activity) pair of the most-enrolled students,
cost = summed time until the student's next logged event, in whole minutes.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from balsched.model import ConfigurationError, IngestionError, Job, JobPool

log = logging.getLogger(__name__)

EVENTS = ("access", "video", "discussion", "navigate", "problem", "wikipedia", "page_close")
_EVENT_ALIASES = {"wiki": "wikipedia", "page close": "page_close", "pageclose": "page_close"}


@dataclass
class IngestReport:
    rows_read: int = 0
    rows_rejected: int = 0
    warnings: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def reject(self, line: int, reason: str) -> None:
        self.rows_rejected += 1
        self.warnings.append(f"line {line}: {reason}")
        log.warning("line %d rejected: %s", line, reason)

    def as_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_rejected": self.rows_rejected,
            "warnings": list(self.warnings),
            **self.extra,
        }


# -- synthetic ------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticSpec:
    count: int = 200
    cost_min: int = 1
    cost_max: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ConfigurationError(f"count must be >= 1, got {self.count}")
        if not 1 <= self.cost_min <= self.cost_max:
            raise ConfigurationError(f"need 1 <= cost_min <= cost_max, got {self.cost_min}, {self.cost_max}")


def generate_synthetic(spec: SyntheticSpec) -> JobPool:
    gen = np.random.default_rng(spec.seed)
    costs = gen.integers(spec.cost_min, spec.cost_max, size=spec.count, endpoint=True)
    return JobPool.from_costs(int(c) for c in costs)


# -- bus driver scheduling ------------------------------------------------


def _sniff(sample: str) -> type[csv.Dialect] | csv.Dialect:
    try:
        return csv.Sniffer().sniff(sample, delimiters=",;\t")
    except csv.Error:
        return csv.excel


def _parse_minutes(text: str) -> float:
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(text)
        sign = -1 if parts[0].startswith("-") else 1
        h, m = abs(int(parts[0])), int(parts[1])
        s = int(parts[2]) if len(parts) == 3 else 0
        return sign * (h * 60 + m + s / 60)
    return float(text)


def parse_bus_driver(stream: io.TextIOBase) -> tuple[JobPool, IngestReport]:
    text = stream.read()
    reader = csv.reader(io.StringIO(text), _sniff(text[:4096]))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise IngestionError("empty bus file", line=1) from None
    missing = [c for c in ("Bus_Line_Id", "Duration") if c not in header]
    if missing:
        raise IngestionError(f"missing column(s): {', '.join(missing)}", line=1)
    id_col, dur_col = header.index("Bus_Line_Id"), header.index("Duration")

    report = IngestReport()
    totals: dict[str, float] = {}
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        report.rows_read += 1
        if len(row) <= max(id_col, dur_col):
            report.reject(line, "too few fields")
            continue
        line_id = row[id_col].strip()
        try:
            minutes = _parse_minutes(row[dur_col])
        except ValueError:
            report.reject(line, f"unparseable duration {row[dur_col]!r}")
            continue
        if minutes < 0:
            report.reject(line, f"negative duration {minutes}")
            continue
        totals[line_id] = totals.get(line_id, 0.0) + minutes
    if not totals:
        raise IngestionError("no usable rows")
    report.extra["jobs"] = len(totals)
    return JobPool(tuple(Job(k, v) for k, v in totals.items())), report


def ingest_bus_driver(path: str | Path) -> tuple[JobPool, IngestReport]:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_bus_driver(fh)


# -- course activity logs -------------------------------------------------


@dataclass(frozen=True)
class CourseLogEntry:
    enroll_id: str
    timestamp: datetime
    event: str
    course_id: str

    def __post_init__(self):
        if self.event not in EVENTS:
            raise ValueError(f"unknown event {self.event!r}")


def _normalize_event(raw: str) -> str:
    e = raw.strip().lower()
    return _EVENT_ALIASES.get(e, e)


def _top_students(entries: list[CourseLogEntry], top: int) -> list[str]:
    courses: dict[str, set[str]] = defaultdict(set)
    for e in entries:
        courses[e.enroll_id].add(e.course_id)
    ranked = sorted(courses, key=lambda s: -len(courses[s]))
    if len(ranked) <= top:
        return ranked
    cutoff = len(courses[ranked[top - 1]])
    # everyone tied with the last admitted student gets in too
    return [s for s in ranked if len(courses[s]) >= cutoff]


def parse_kdd_logs(
    stream: io.TextIOBase, top_students: int = 30, per_course: bool = False
) -> tuple[JobPool, IngestReport]:
    """Course log CSV ``enroll_id,date,time,event,course_id`` to a job pool.

    Each entry lasts until the student's next entry (the whole log of the
    student, or only the same course when ``per_course``); the final entry
    of a stream lasts zero. Durations are summed per (course, event) and
    floored to minutes.
    """
    if top_students < 1:
        raise ConfigurationError(f"top_students must be >= 1, got {top_students}")
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise IngestionError("empty log file", line=1) from None
    expected = ["enroll_id", "date", "time", "event", "course_id"]
    if header != expected:
        raise IngestionError(f"expected header {','.join(expected)}, got {','.join(header)}", line=1)

    report = IngestReport()
    entries: list[CourseLogEntry] = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        report.rows_read += 1
        if len(row) != 5:
            report.reject(line, f"expected 5 fields, got {len(row)}")
            continue
        enroll, date, time, event, course = (c.strip() for c in row)
        try:
            ts = datetime.strptime(f"{date} {time}", "%Y-%m-%d %H:%M:%S")
        except ValueError:
            report.reject(line, f"unparseable timestamp {date!r} {time!r}")
            continue
        try:
            entries.append(CourseLogEntry(enroll, ts, _normalize_event(event), course))
        except ValueError as exc:
            report.reject(line, str(exc))
    if not entries:
        raise IngestionError("no usable log entries")

    chosen = set(_top_students(entries, top_students))
    report.extra["students_selected"] = len(chosen)

    streams: dict[tuple[str, ...], list[int]] = defaultdict(list)
    for i, e in enumerate(entries):
        if e.enroll_id in chosen:
            key = (e.enroll_id, e.course_id) if per_course else (e.enroll_id,)
            streams[key].append(i)

    seconds: dict[tuple[str, str], float] = {}
    first_seen: dict[tuple[str, str], int] = {}
    for idx in streams.values():
        idx.sort(key=lambda i: (entries[i].timestamp, i))
        for a, b in zip(idx, idx[1:] + [None]):
            e = entries[a]
            dt = (entries[b].timestamp - e.timestamp).total_seconds() if b is not None else 0.0
            key = (e.course_id, e.event)
            seconds[key] = seconds.get(key, 0.0) + dt
            first_seen[key] = min(first_seen.get(key, a), a)

    keys = sorted(seconds, key=first_seen.__getitem__)
    jobs = tuple(Job(f"{c}:{ev}", float(int(seconds[(c, ev)] // 60))) for c, ev in keys)
    report.extra["jobs"] = len(jobs)
    return JobPool(jobs), report


def ingest_kdd_logs(
    path: str | Path, top_students: int = 30, per_course: bool = False
) -> tuple[JobPool, IngestReport]:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_kdd_logs(fh, top_students, per_course)
