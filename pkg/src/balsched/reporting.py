"""Serializable run reports and their canonical JSON / CSV forms."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from balsched import rng
from balsched.engine import PpsjbpResult, materialize, row_variances
from balsched.model import ConfigurationError, IntegrityError, JobPool, ScheduleSet

SIG_DIGITS = 6


def _canon(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    if hasattr(obj, "as_dict"):
        return _canon(obj.as_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    """Key-sorted JSON with floats rounded to six significant digits."""
    return json.dumps(_canon(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


@dataclass
class ScheduleReport:
    """Per-schedule totals and counts of one schedule set."""

    per_schedule: list[dict]
    variance: float
    iteration: int | None = None

    @classmethod
    def from_set(cls, sset: ScheduleSet, include_ids: bool = True) -> "ScheduleReport":
        rows = []
        for s in sset.schedules:
            row = {
                "index": s.index,
                "total_cost": s.total_cost,
                "job_count": s.job_count,
                "avg_cost": s.total_cost / s.job_count if s.job_count else None,
            }
            if include_ids:
                row["job_ids"] = list(s.job_ids)
            rows.append(row)
        it = None if sset.iteration is None else sset.iteration + 1
        return cls(rows, sset.variance, it)

    @property
    def totals(self) -> list[float]:
        return [r["total_cost"] for r in self.per_schedule]

    @property
    def job_counts(self) -> list[int]:
        return [r["job_count"] for r in self.per_schedule]

    def as_dict(self) -> dict:
        d = {"per_schedule": self.per_schedule, "variance": self.variance}
        if self.iteration is not None:
            d["iteration"] = self.iteration
        return d


@dataclass
class ComparisonReport:
    algorithm: str
    schedules: ScheduleReport
    params: dict = field(default_factory=dict)

    @property
    def variance(self) -> float:
        return self.schedules.variance

    def validate(self, pool: JobPool) -> None:
        if sum(self.schedules.job_counts) != pool.n:
            raise IntegrityError("job counts do not sum to the pool size")
        if not math.isclose(math.fsum(self.schedules.totals), pool.total_cost, rel_tol=1e-9, abs_tol=1e-9):
            raise IntegrityError("schedule totals do not sum to the pool total")

    def as_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "per_schedule": self.schedules.per_schedule,
            "variance": self.schedules.variance,
            "params": self.params,
        }


def comparison_deltas(ppsjbp: ComparisonReport, offpsp: ComparisonReport) -> dict:
    """Side-by-side rows (by position in each report) and the variance ratio."""
    a, b = ppsjbp.schedules.per_schedule, offpsp.schedules.per_schedule
    rows = []
    for pos in range(max(len(a), len(b))):
        ra = a[pos] if pos < len(a) else {}
        rb = b[pos] if pos < len(b) else {}
        rows.append({
            "position": pos + 1,
            "ppsjbp_avg_cost": ra.get("avg_cost"),
            "offpsp_avg_cost": rb.get("avg_cost"),
            "ppsjbp_job_count": ra.get("job_count"),
            "offpsp_job_count": rb.get("job_count"),
            "ppsjbp_total_cost": ra.get("total_cost"),
            "offpsp_total_cost": rb.get("total_cost"),
        })
    ratio = offpsp.variance / ppsjbp.variance if ppsjbp.variance > 0 else None
    return {"per_schedule": rows, "variance_ratio_offpsp_over_ppsjbp": ratio}


@dataclass
class RandomSetComparison:
    balanced: ScheduleReport
    first: list[ScheduleReport]
    second: list[ScheduleReport]
    params: dict = field(default_factory=dict)

    @property
    def others(self) -> list[ScheduleReport]:
        return self.first + self.second

    def validate(self) -> None:
        if any(self.balanced.variance > o.variance for o in self.others):
            raise IntegrityError("balanced set is not minimal among the reported sets")
        a = {o.iteration for o in self.first}
        b = {o.iteration for o in self.second}
        if a & b or self.balanced.iteration in a | b:
            raise IntegrityError("sampled sets overlap")

    def as_dict(self) -> dict:
        return {
            "balanced": self.balanced.as_dict(),
            "first_random_sets": [o.as_dict() for o in self.first],
            "second_random_sets": [o.as_dict() for o in self.second],
            "params": self.params,
        }


def random_set_comparison(pool: JobPool, result: PpsjbpResult, k_prime: int, seed: int) -> RandomSetComparison:
    """The winning allocation next to ``2 * k_prime`` other iterations drawn without replacement."""
    K = result.rra_output.cost_matrix.rows
    if k_prime < 1 or K <= 2 * k_prime:
        raise ConfigurationError(f"need k_prime >= 1 and K > 2*k_prime (K={K}, k_prime={k_prime})")
    l = result.rra_output.config.schedule_count
    candidates = np.array([k for k in range(K) if k != result.index])
    picker = np.random.default_rng(rng.derive_seed(seed, "random-sets"))
    picked = picker.choice(candidates, size=2 * k_prime, replace=False)
    variances = row_variances(result.rra_output.cost_matrix) if l >= 2 else np.zeros(K)

    def report(k: int) -> ScheduleReport:
        sset = materialize(pool, result.rra_output.assignment(int(k)), l, iteration=int(k))
        rep = ScheduleReport.from_set(sset, include_ids=False)
        rep.variance = float(variances[k])
        return rep

    balanced = ScheduleReport.from_set(result.schedule_set, include_ids=False)
    balanced.variance = float(variances[result.index])
    return RandomSetComparison(
        balanced,
        [report(k) for k in picked[:k_prime]],
        [report(k) for k in picked[k_prime:]],
        {"K": K, "l": l, "k_prime": k_prime, "seed": seed},
    )


def write_schedule_csv(report: ComparisonReport, directory: str | Path) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{report.algorithm}_schedules.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "total_cost", "job_count", "avg_cost"])
        for r in report.schedules.per_schedule:
            avg = "" if r["avg_cost"] is None else f"{r['avg_cost']:.{SIG_DIGITS}g}"
            w.writerow([r["index"], f"{r['total_cost']:.{SIG_DIGITS}g}", r["job_count"], avg])
    return path


def write_rows_csv(rows: list[dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return path
