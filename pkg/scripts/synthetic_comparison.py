"""Compare the balanced scheduler against the greedy baseline on synthetic pools.

Also prints the balanced set next to randomly picked non-winning iterations.
"""

import argparse

from balsched.datasets import SyntheticSpec, generate_synthetic
from balsched.engine import ppsjbp
from balsched.offpsp import OffpspConfig, run_offpsp
from balsched.reporting import random_set_comparison


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--schedules", type=int, default=4)
    ap.add_argument("--iterations", type=int, default=8000)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()

    print("seed  balanced_var  baseline_var  baseline_counts")
    for seed in range(args.seeds):
        pool = generate_synthetic(SyntheticSpec(count=args.count, seed=seed))
        res = ppsjbp(pool, args.schedules, args.iterations, seed)
        base = run_offpsp(pool, OffpspConfig(args.schedules))
        print(f"{seed:4d}  {res.variance:12.2f}  {base.variance:12.2f}  {base.job_counts}")

    pool = generate_synthetic(SyntheticSpec(count=args.count, seed=0))
    res = ppsjbp(pool, args.schedules, args.iterations, 0)
    cmp = random_set_comparison(pool, res, 4, 0).as_dict()
    print(f"\nbalanced iteration {cmp['balanced']['iteration']}: variance {cmp['balanced']['variance']:.2f}")
    for entry in cmp["first_random_sets"] + cmp["second_random_sets"]:
        print(f"random iteration {entry['iteration']}: variance {entry['variance']:.2f}")


if __name__ == "__main__":
    main()
