"""Jobs, schedules and the planning horizon."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np


class ConfigurationError(ValueError):
    """Invalid run parameters."""


class IntegrityError(ValueError):
    """A schedule or schedule set disagrees with its job pool."""


class DegenerateVarianceError(ValueError):
    """Sample variance asked for fewer than two values."""


class IngestionError(ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Job:
    id: str
    cost: float
    location: str | None = None

    def __post_init__(self):
        if not isinstance(self.cost, (int, float)) or not math.isfinite(self.cost):
            raise ConfigurationError(f"job {self.id!r}: cost must be a finite number, got {self.cost!r}")
        if self.cost < 0:
            raise ConfigurationError(f"job {self.id!r}: negative cost {self.cost}")


@dataclass(frozen=True)
class JobPool:
    """Ordered, id-unique collection of jobs."""

    jobs: tuple[Job, ...]

    def __post_init__(self):
        object.__setattr__(self, "jobs", tuple(self.jobs))
        seen = set()
        for job in self.jobs:
            if job.id in seen:
                raise ConfigurationError(f"duplicate job id {job.id!r}")
            seen.add(job.id)

    @classmethod
    def from_costs(cls, costs: Iterable[float], prefix: str = "γ_") -> "JobPool":
        return cls(tuple(Job(f"{prefix}{i}", float(c)) for i, c in enumerate(costs, start=1)))

    @property
    def n(self) -> int:
        return len(self.jobs)

    @cached_property
    def costs(self) -> np.ndarray:
        arr = np.array([j.cost for j in self.jobs], dtype=np.float64)
        arr.flags.writeable = False
        return arr

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(j.id for j in self.jobs)

    @cached_property
    def position(self) -> dict[str, int]:
        return {job_id: i for i, job_id in enumerate(self.ids)}

    @property
    def total_cost(self) -> float:
        return math.fsum(j.cost for j in self.jobs)

    def cost_of(self, job_id: str) -> float:
        try:
            return self.jobs[self.position[job_id]].cost
        except KeyError:
            raise IntegrityError(f"unknown job id {job_id!r}") from None

    def locations(self) -> list[str | None]:
        return list(dict.fromkeys(j.location for j in self.jobs))

    def at_location(self, location: str | None) -> "JobPool":
        return JobPool(tuple(j for j in self.jobs if j.location == location))

    def __len__(self) -> int:
        return len(self.jobs)

    def __iter__(self):
        return iter(self.jobs)


@dataclass(frozen=True)
class TimeHorizon:
    start: float
    finish: float
    unit: float

    def __post_init__(self):
        if not self.unit > 0:
            raise ConfigurationError(f"time unit must be positive, got {self.unit}")
        if not self.finish > self.start:
            raise ConfigurationError(f"finish ({self.finish}) must be after start ({self.start})")


def make_schedule_count(horizon: TimeHorizon) -> int:
    """Number of equal-length schedules the horizon splits into."""
    ratio = (horizon.finish - horizon.start) / horizon.unit
    count = round(ratio)
    if count < 1 or not math.isclose(ratio, count, rel_tol=1e-9, abs_tol=1e-9):
        raise ConfigurationError(
            f"span {horizon.finish} - {horizon.start} is not an integer multiple of unit {horizon.unit}"
        )
    return int(count)


@dataclass(frozen=True)
class Schedule:
    """One time window and the jobs placed in it, in placement order."""

    index: int
    duration: float
    job_ids: tuple[str, ...]
    total_cost: float

    @property
    def job_count(self) -> int:
        return len(self.job_ids)


def build_schedule(index: int, duration: float, job_ids: Sequence[str], pool: JobPool) -> Schedule:
    ids = tuple(job_ids)
    return Schedule(index, duration, ids, math.fsum(pool.cost_of(j) for j in ids))


def recompute_total_cost(schedule: Schedule, pool: JobPool) -> float:
    """Sum member costs from the pool; raises IntegrityError on unknown ids."""
    return math.fsum(pool.cost_of(j) for j in schedule.job_ids)


def sample_variance(values: Sequence[float] | np.ndarray) -> float:
    """Sum of squared deviations from the mean, divided by ``len - 1``."""
    x = np.asarray(values, dtype=np.float64)
    if x.size < 2:
        raise DegenerateVarianceError("sample variance needs at least two values")
    return float(((x - x.mean()) ** 2).sum() / (x.size - 1))


@dataclass(frozen=True)
class ScheduleSet:
    schedules: tuple[Schedule, ...]
    iteration: int | None
    variance: float

    @property
    def totals(self) -> list[float]:
        return [s.total_cost for s in self.schedules]

    @property
    def job_counts(self) -> list[int]:
        return [s.job_count for s in self.schedules]

    def validate(self, pool: JobPool, rel_tol: float = 1e-9) -> None:
        """Check partition, cached totals, equal durations and the stored variance."""
        placed = [j for s in self.schedules for j in s.job_ids]
        if len(placed) != len(set(placed)):
            raise IntegrityError("a job appears in more than one schedule")
        if set(placed) != set(pool.ids):
            missing = set(pool.ids) - set(placed)
            extra = set(placed) - set(pool.ids)
            raise IntegrityError(f"not a partition of the pool (missing={sorted(missing)}, extra={sorted(extra)})")
        if len({s.duration for s in self.schedules}) > 1:
            raise IntegrityError("schedules have unequal durations")
        for s in self.schedules:
            if not math.isclose(recompute_total_cost(s, pool), s.total_cost, rel_tol=rel_tol, abs_tol=1e-12):
                raise IntegrityError(f"schedule {s.index}: cached total {s.total_cost} is stale")
        if len(self.schedules) >= 2:
            v = sample_variance(self.totals)
            if not math.isclose(v, self.variance, rel_tol=rel_tol, abs_tol=1e-9):
                raise IntegrityError(f"stored variance {self.variance} != recomputed {v}")


@dataclass(frozen=True)
class CostMatrix:
    """Per-iteration schedule totals, shape ``(iterations, schedules)``."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ConfigurationError("cost matrix must be two-dimensional")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


# -- jobs CSV -------------------------------------------------------------


def parse_jobs_csv(stream: TextIO) -> JobPool:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestionError("empty jobs file", line=1) from None
    header = [h.strip() for h in header]
    if header[:2] != ["id", "cost"] or len(header) > 3 or (len(header) == 3 and header[2] != "location"):
        raise IngestionError(f"expected header id,cost[,location], got {','.join(header)}", line=1)
    jobs = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) not in (2, 3) or len(row) > len(header):
            raise IngestionError(f"expected {len(header)} fields, got {len(row)}", line=line)
        job_id = row[0].strip()
        if not job_id:
            raise IngestionError("empty job id", line=line)
        try:
            cost = float(row[1])
        except ValueError:
            raise IngestionError(f"cost {row[1]!r} is not a number", line=line) from None
        location = row[2].strip() or None if len(row) == 3 else None
        try:
            jobs.append(Job(job_id, cost, location))
        except ConfigurationError as exc:
            raise IngestionError(str(exc), line=line) from None
    try:
        return JobPool(tuple(jobs))
    except ConfigurationError as exc:
        raise IngestionError(str(exc)) from None


def read_jobs_csv(path: str | Path) -> JobPool:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_jobs_csv(fh)


def _fmt_cost(cost: float) -> str:
    return str(int(cost)) if float(cost).is_integer() else repr(float(cost))


def format_jobs_csv(pool: JobPool) -> str:
    buf = io.StringIO()
    with_location = any(j.location is not None for j in pool)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "cost", "location"] if with_location else ["id", "cost"])
    for j in pool:
        row = [j.id, _fmt_cost(j.cost)]
        if with_location:
            row.append(j.location or "")
        writer.writerow(row)
    return buf.getvalue()


def write_jobs_csv(pool: JobPool, path: str | Path) -> None:
    Path(path).write_text(format_jobs_csv(pool), encoding="utf-8")
