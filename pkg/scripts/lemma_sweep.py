"""Run the Monte Carlo checks over a range of pool sizes and schedule counts."""

import argparse

from balsched.verification import check_chernoff_tail, check_coupon_collector, check_expected_load


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--trials", type=int, default=20_000)
    args = ap.parse_args()

    for n in (50, 200, 359, 1000):
        for l in (2, 4, 8):
            load = check_expected_load(n, l, args.trials, args.seed)
            tail = check_chernoff_tail(n, l, args.trials, args.seed)
            print(
                f"n={n:5d} l={l}  mean load {load.observed:8.3f} (expect {load.predicted:g})  "
                f"tail {tail.observed:.2e} <= bound {tail.predicted:.2e}  {'ok' if load.passed and tail.passed else 'FAIL'}"
            )
    for l in (2, 4, 8, 16):
        r = check_coupon_collector(l, args.trials, args.seed)
        print(f"cover time l={l:2d}: {r.observed:7.3f} vs {r.predicted:7.3f}  {'ok' if r.passed else 'FAIL'}")


if __name__ == "__main__":
    main()
