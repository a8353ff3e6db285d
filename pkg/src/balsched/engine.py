"""Repeated random allocation with minimum-variance selection.

The pipeline draws ``K`` independent uniform assignments of the job pool to
``l`` schedules, keeps the per-schedule totals of each draw, picks the draw
whose totals have the smallest sample variance and hands its schedules out
largest total first.

Only the cost matrix and the per-iteration seeds are stored by default; the
winning assignment is rebuilt by replaying its seed.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from balsched import rng
from balsched.model import (
    ConfigurationError,
    CostMatrix,
    DegenerateVarianceError,
    JobPool,
    Schedule,
    ScheduleSet,
    TimeHorizon,
    make_schedule_count,
    sample_variance,
)

DEFAULT_ITERATIONS = 8000
TieMode = Literal["paper", "first"]

# bounds memory of one vectorized block (iterations x jobs)
_BLOCK_CELLS = 1 << 20


@dataclass(frozen=True)
class RraConfig:
    iterations: int = DEFAULT_ITERATIONS
    schedule_count: int = 4
    master_seed: int = 0
    strict_order: bool = False
    retain_all: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigurationError(f"iterations must be >= 1, got {self.iterations}")
        if self.schedule_count < 1:
            raise ConfigurationError(f"schedule count must be >= 1, got {self.schedule_count}")
        if not 0 <= self.master_seed <= rng.MASK64:
            raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {self.master_seed}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class RraOutput:
    cost_matrix: CostMatrix
    seeds: np.ndarray
    config: RraConfig
    n_jobs: int
    assignments: np.ndarray | None = None

    def assignment(self, iteration: int) -> np.ndarray:
        """0-based schedule index of every job in the given iteration."""
        if not 0 <= iteration < self.cost_matrix.rows:
            raise IndexError(f"iteration {iteration} out of range")
        if self.assignments is not None:
            return np.array(self.assignments[iteration])
        return rng.destinations(
            self.seeds[iteration : iteration + 1],
            self.n_jobs,
            self.config.schedule_count,
            shuffle_order=self.config.strict_order,
        )[0]


def _totals(dest: np.ndarray, costs: np.ndarray, l: int) -> np.ndarray:
    rows = dest.shape[0]
    flat = (dest + np.arange(rows)[:, None] * l).ravel()
    weights = np.broadcast_to(costs, dest.shape).ravel()
    return np.bincount(flat, weights=weights, minlength=rows * l).reshape(rows, l)


def rra(pool: JobPool, config: RraConfig, *, injected: np.ndarray | None = None) -> RraOutput:
    """Run ``config.iterations`` uniform allocations of the pool.

    ``injected`` (test hook, ``K x n`` array of 0-based schedule indices)
    replaces sampling with fixed assignments; ``config.iterations`` is then
    ignored in favour of the number of injected rows.
    """
    if pool.n < 1:
        raise ConfigurationError("job pool is empty")
    l = config.schedule_count
    costs = pool.costs
    if injected is not None:
        table = np.asarray(injected, dtype=np.int64)
        if table.ndim != 2 or table.shape[1] != pool.n or table.shape[0] < 1:
            raise ConfigurationError(f"injected assignments must have shape (K, {pool.n})")
        if table.min() < 0 or table.max() >= l:
            raise ConfigurationError(f"injected schedule index outside 1..{l}")
        return RraOutput(
            cost_matrix=CostMatrix(_totals(table, costs, l)),
            seeds=np.zeros(table.shape[0], dtype=np.uint64),
            config=config,
            n_jobs=pool.n,
            assignments=table,
        )

    K = config.iterations
    seeds = rng.sub_seeds(config.master_seed, 0, K)
    block = max(1, _BLOCK_CELLS // pool.n)
    spans = [(s, min(s + block, K)) for s in range(0, K, block)]

    def run(span):
        lo, hi = span
        dest = rng.destinations(seeds[lo:hi], pool.n, l, shuffle_order=config.strict_order)
        return _totals(dest, costs, l), (dest.astype(np.int32) if config.retain_all else None)

    if config.workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as ex:
            parts = list(ex.map(run, spans))
    else:
        parts = [run(s) for s in spans]

    matrix = np.concatenate([p[0] for p in parts], axis=0)
    kept = np.concatenate([p[1] for p in parts], axis=0) if config.retain_all else None
    return RraOutput(CostMatrix(matrix), seeds, config, pool.n, kept)


def row_variances(matrix: CostMatrix | np.ndarray) -> np.ndarray:
    values = matrix.values if isinstance(matrix, CostMatrix) else np.asarray(matrix, dtype=np.float64)
    l = values.shape[1]
    if l < 2:
        raise DegenerateVarianceError("variance of a single schedule is undefined (L - 1 = 0)")
    dev = values - values.mean(axis=1, keepdims=True)
    return (dev * dev).sum(axis=1) / (l - 1)


def mbdf(matrix: CostMatrix | np.ndarray, tie_mode: TieMode = "paper") -> tuple[int, float]:
    """Row index (0-based) with the smallest sample variance, and that variance.

    ``"paper"`` keeps the last of several equal minima, as a running
    ``<=`` comparison does; ``"first"`` keeps the earliest.
    """
    v = row_variances(matrix)
    if v.size == 0:
        raise ConfigurationError("cost matrix has no rows")
    best = v.min()
    hits = np.flatnonzero(v == best)
    if tie_mode == "paper":
        idx = int(hits[-1])
    elif tie_mode == "first":
        idx = int(hits[0])
    else:
        raise ConfigurationError(f"unknown tie mode {tie_mode!r}")
    return idx, float(best)


def lcsf(schedule_set: ScheduleSet) -> ScheduleSet:
    """Reorder schedules by non-increasing total cost (stable)."""
    ordered = sorted(schedule_set.schedules, key=lambda s: -s.total_cost)
    return ScheduleSet(tuple(ordered), schedule_set.iteration, schedule_set.variance)


def materialize(
    pool: JobPool,
    assignment: np.ndarray,
    l: int,
    *,
    iteration: int | None = None,
    duration: float = 1.0,
) -> ScheduleSet:
    """Turn a job -> schedule index vector into a ScheduleSet (1-based indices)."""
    members: list[list[int]] = [[] for _ in range(l)]
    for pos, dest in enumerate(np.asarray(assignment).tolist()):
        members[dest].append(pos)
    costs = pool.costs
    schedules = tuple(
        Schedule(
            index=i + 1,
            duration=duration,
            job_ids=tuple(pool.jobs[p].id for p in idx),
            total_cost=float(costs[idx].sum()) if idx else 0.0,
        )
        for i, idx in enumerate(members)
    )
    variance = sample_variance([s.total_cost for s in schedules]) if l >= 2 else 0.0
    return ScheduleSet(schedules, iteration, variance)


@dataclass(frozen=True)
class PpsjbpResult:
    schedule_set: ScheduleSet
    rra_output: RraOutput
    index: int
    variance: float


def _resolve(horizon: TimeHorizon | int) -> tuple[int, float]:
    if isinstance(horizon, TimeHorizon):
        return make_schedule_count(horizon), horizon.unit
    if isinstance(horizon, (int, np.integer)) and horizon >= 1:
        return int(horizon), 1.0
    raise ConfigurationError(f"expected a TimeHorizon or a positive schedule count, got {horizon!r}")


def ppsjbp(
    pool: JobPool,
    horizon: TimeHorizon | int,
    iterations: int = DEFAULT_ITERATIONS,
    master_seed: int = 0,
    *,
    tie_mode: TieMode = "paper",
    strict_order: bool = False,
    retain_all: bool = False,
    workers: int = 1,
    injected: np.ndarray | None = None,
) -> PpsjbpResult:
    """Full pipeline, keeping the intermediate allocation data."""
    l, duration = _resolve(horizon)
    config = RraConfig(iterations, l, master_seed, strict_order, retain_all, workers)
    out = rra(pool, config, injected=injected)
    if l == 1:
        # one schedule: every allocation is the same and the variance is undefined
        index, variance = 0, 0.0
    else:
        index, variance = mbdf(out.cost_matrix, tie_mode)
    chosen = materialize(pool, out.assignment(index), l, iteration=index, duration=duration)
    return PpsjbpResult(lcsf(chosen), out, index, variance)


def run_ppsjbp(
    pool: JobPool,
    horizon: TimeHorizon | int,
    iterations: int = DEFAULT_ITERATIONS,
    master_seed: int = 0,
    **kwargs,
) -> ScheduleSet:
    """Most balanced of ``iterations`` random allocations, largest schedule first."""
    return ppsjbp(pool, horizon, iterations, master_seed, **kwargs).schedule_set
