"""Threshold-greedy baseline (OffPSP under uniform utility).

With every job's utility fixed at 1 the utility/cost ratio is largest for the
cheapest job, so the greedy order is simply ascending cost (zero-cost jobs
first, input order on ties). Jobs fill the current schedule until its total
first exceeds the threshold; the next job then opens the next schedule, and
whatever is left once the last schedule is reached stays there.

The original keep-highest-utility/discard step cannot change anything when
all utilities are equal, so no job is ever discarded here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from balsched.model import ConfigurationError, JobPool, Schedule, ScheduleSet, sample_variance

UNIFORM_UTILITY = 1.0


@dataclass(frozen=True)
class OffpspConfig:
    schedule_count: int
    threshold: float | None = None
    uniform_utility: float = UNIFORM_UTILITY

    def __post_init__(self):
        if self.schedule_count < 1:
            raise ConfigurationError(f"schedule count must be >= 1, got {self.schedule_count}")
        if self.threshold is not None and not self.threshold >= 0:
            raise ConfigurationError(f"threshold must be nonnegative, got {self.threshold}")
        if self.uniform_utility != UNIFORM_UTILITY:
            raise ConfigurationError("only uniform utility 1 is supported")

    def resolve_threshold(self, pool: JobPool) -> float:
        """Explicit threshold, or total pool cost split evenly over the schedules."""
        th = self.threshold if self.threshold is not None else pool.total_cost / self.schedule_count
        if pool.n and not th > 0:
            raise ConfigurationError("threshold must be positive for a nonempty pool")
        return th


def greedy_order(pool: JobPool) -> list[int]:
    """Job positions by decreasing utility/cost ratio; zero cost counts as infinite ratio."""
    return sorted(range(pool.n), key=lambda i: pool.jobs[i].cost)


def run_offpsp(pool: JobPool, config: OffpspConfig, duration: float = 1.0) -> ScheduleSet:
    if pool.n < 1:
        raise ConfigurationError("job pool is empty")
    threshold = config.resolve_threshold(pool)
    l = config.schedule_count
    members: list[list[int]] = [[] for _ in range(l)]
    current = 0
    running = 0.0
    for pos in greedy_order(pool):
        members[current].append(pos)
        running += pool.jobs[pos].cost
        if running > threshold and current < l - 1:
            current += 1
            running = 0.0
    schedules = tuple(
        Schedule(
            index=i + 1,
            duration=duration,
            job_ids=tuple(pool.jobs[p].id for p in idx),
            total_cost=math.fsum(pool.jobs[p].cost for p in idx),
        )
        for i, idx in enumerate(members)
    )
    variance = sample_variance([s.total_cost for s in schedules]) if l >= 2 else 0.0
    return ScheduleSet(schedules, None, variance)
