"""Replay the six-job worked example from fixed assignments and print each stage."""

from pathlib import Path

import numpy as np

from balsched.engine import ppsjbp, row_variances
from balsched.model import TimeHorizon, read_jobs_csv

FIX = Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def main() -> None:
    pool = read_jobs_csv(FIX / "example1_jobs.csv")
    rows = np.loadtxt(FIX / "example1_assignments.csv", delimiter=",", skiprows=1, usecols=range(1, pool.n + 1))
    res = ppsjbp(pool, TimeHorizon(0, 900, 300), injected=rows.astype(np.int64) - 1)
    matrix = res.rra_output.cost_matrix.values
    for k, (totals, var) in enumerate(zip(matrix, row_variances(res.rra_output.cost_matrix)), start=1):
        print(f"iteration {k}: totals={totals.astype(int).tolist()} variance={var:g}")
    print(f"selected iteration {res.index + 1} (variance {res.variance:g})")
    for s in res.schedule_set.schedules:
        print(f"  schedule {s.index}: total={s.total_cost:g} jobs={', '.join(s.job_ids)}")


if __name__ == "__main__":
    main()
