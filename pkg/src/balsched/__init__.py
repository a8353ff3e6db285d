"""Balanced scheduling of costed jobs by repeated random allocation."""

from balsched.engine import RraConfig, RraOutput, lcsf, mbdf, ppsjbp, rra, run_ppsjbp
from balsched.model import (
    CostMatrix,
    Job,
    JobPool,
    Schedule,
    ScheduleSet,
    TimeHorizon,
    make_schedule_count,
    recompute_total_cost,
    sample_variance,
)
from balsched.offpsp import OffpspConfig, run_offpsp

__all__ = [
    "CostMatrix", "Job", "JobPool", "OffpspConfig", "RraConfig", "RraOutput", "Schedule",
    "ScheduleSet", "TimeHorizon", "lcsf", "make_schedule_count", "mbdf", "ppsjbp",
    "recompute_total_cost", "rra", "run_offpsp", "run_ppsjbp", "sample_variance",
]
