"""``balsched`` command line.

Exit codes: 0 ok, 1 verification failure, 2 bad input file, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from balsched import datasets, verification
from balsched.engine import DEFAULT_ITERATIONS, ppsjbp
from balsched.model import (
    ConfigurationError,
    IngestionError,
    JobPool,
    TimeHorizon,
    format_jobs_csv,
    make_schedule_count,
    read_jobs_csv,
)
from balsched.offpsp import OffpspConfig, run_offpsp
from balsched.rng import derive_seed
from balsched.reporting import (
    ComparisonReport,
    ScheduleReport,
    canonical_json,
    comparison_deltas,
    random_set_comparison,
    write_rows_csv,
    write_schedule_csv,
)

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_USAGE = 0, 1, 2, 64
SEED_ENV = "BALSCHED_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"seed out of unsigned 64-bit range: {text}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [_positive(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text}") from None


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return _u64(env)
        except (ValueError, argparse.ArgumentTypeError):
            raise UsageError(f"{SEED_ENV}={env!r} is not an unsigned 64-bit integer") from None
    return 0


def _schedule_count(args) -> tuple[int, float]:
    if args.horizon is not None:
        start, finish, unit = args.horizon
        h = TimeHorizon(start, finish, unit)
        return make_schedule_count(h), h.unit
    if args.schedules is None:
        raise UsageError("one of --schedules or --horizon is required")
    return args.schedules, 1.0


def _load_pool(args) -> JobPool:
    pool = read_jobs_csv(args.jobs)
    if getattr(args, "location", None) is not None:
        pool = pool.at_location(args.location)
    if pool.n < 1:
        raise IngestionError("no jobs to schedule")
    return pool


def read_injected_assignments(path: str | Path, pool: JobPool, l: int) -> np.ndarray:
    """Test-only: CSV ``iteration,<job id>...`` with 1-based schedule numbers per job."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise IngestionError("empty assignment file", line=1) from None
        if not header or header[0] != "iteration" or sorted(header[1:]) != sorted(pool.ids):
            raise IngestionError("header must be 'iteration' followed by every job id once", line=1)
        cols = [pool.position[h] for h in header[1:]]
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise IngestionError(f"expected {len(header)} fields", line=reader.line_num)
            try:
                values = [int(v) for v in row[1:]]
            except ValueError:
                raise IngestionError("schedule numbers must be integers", line=reader.line_num) from None
            if any(not 1 <= v <= l for v in values):
                raise IngestionError(f"schedule number outside 1..{l}", line=reader.line_num)
            out = [0] * pool.n
            for c, v in zip(cols, values):
                out[c] = v - 1
            rows.append(out)
    if not rows:
        raise IngestionError("no assignment rows")
    return np.array(rows, dtype=np.int64)


def _ppsjbp_report(pool, args, l, duration, seed):
    injected = None
    if getattr(args, "inject_assignments", None):
        injected = read_injected_assignments(args.inject_assignments, pool, l)
    res = ppsjbp(
        pool, l, args.iterations, seed,
        tie_mode=args.tie_mode, strict_order=args.strict_order,
        retain_all=args.retain_all, workers=args.workers, injected=injected,
    )
    sched = ScheduleReport.from_set(res.schedule_set)
    params = {
        "K": res.rra_output.cost_matrix.rows, "l": l, "seed": seed, "tie_mode": args.tie_mode,
        "strict_order": args.strict_order, "selected_iteration": res.index + 1,
        "duration": duration, "injected": injected is not None,
    }
    return ComparisonReport("ppsjbp", sched, params), res


def _offpsp_report(pool, args, l, duration):
    config = OffpspConfig(l, args.threshold)
    sset = run_offpsp(pool, config, duration)
    params = {
        "l": l, "threshold": config.resolve_threshold(pool), "duration": duration,
        "zero_cost_jobs": sum(1 for j in pool if j.cost == 0),
    }
    return ComparisonReport("offpsp", ScheduleReport.from_set(sset), params)


def cmd_generate(args) -> int:
    pool = datasets.generate_synthetic(datasets.SyntheticSpec(args.count, args.cost_min, args.cost_max, _seed(args)))
    _emit_text(format_jobs_csv(pool), args.out)
    return EXIT_OK


def _emit_text(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_ingest_bus(args) -> int:
    pool, report = datasets.ingest_bus_driver(args.raw)
    _emit_text(format_jobs_csv(pool), args.out)
    sys.stderr.write(canonical_json(report.as_dict()))
    return EXIT_OK


def cmd_ingest_kdd(args) -> int:
    pool, report = datasets.ingest_kdd_logs(args.raw, args.top_students, args.per_course)
    _emit_text(format_jobs_csv(pool), args.out)
    sys.stderr.write(canonical_json(report.as_dict()))
    return EXIT_OK


def cmd_schedule(args) -> int:
    pool = _load_pool(args)
    l, duration = _schedule_count(args)
    if args.algo == "ppsjbp":
        report, _ = _ppsjbp_report(pool, args, l, duration, _seed(args))
    else:
        report = _offpsp_report(pool, args, l, duration)
    report.validate(pool)
    if args.csv:
        write_schedule_csv(report, args.csv)
    sys.stdout.write(canonical_json(report))
    return EXIT_OK


def cmd_compare(args) -> int:
    pool = _load_pool(args)
    l, duration = _schedule_count(args)
    seed = _seed(args)
    pp, _ = _ppsjbp_report(pool, args, l, duration, derive_seed(seed, "ppsjbp"))
    pp.params["master_seed"] = seed
    off = _offpsp_report(pool, args, l, duration)
    pp.validate(pool)
    off.validate(pool)
    deltas = comparison_deltas(pp, off)
    if args.csv:
        write_schedule_csv(pp, args.csv)
        write_schedule_csv(off, args.csv)
        write_rows_csv(deltas["per_schedule"], Path(args.csv) / "compare.csv")
    sys.stdout.write(canonical_json({"ppsjbp": pp, "offpsp": off, "deltas": deltas}))
    return EXIT_OK


def cmd_random_sets(args) -> int:
    pool = _load_pool(args)
    l, _ = _schedule_count(args)
    if l < 2:
        raise UsageError("random set comparison needs at least two schedules")
    if args.iterations <= 2 * args.k_prime:
        raise UsageError(f"--iterations ({args.iterations}) must exceed 2 * --k-prime ({2 * args.k_prime})")
    seed = _seed(args)
    _, res = _ppsjbp_report(pool, args, l, 1.0, seed)
    comparison = random_set_comparison(pool, res, args.k_prime, seed)
    comparison.validate()
    sys.stdout.write(canonical_json(comparison))
    return EXIT_OK


def _table(reports) -> str:
    lines = [f"{'lemma':<6}{'predicted':>14}{'observed':>14}{'tolerance':>12}  result"]
    for r in reports:
        lines.append(
            f"{r.lemma_id:<6}{r.predicted:>14.6g}{r.observed:>14.6g}{r.tolerance:>12.4g}  {'PASS' if r.passed else 'FAIL'}"
        )
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    ids = [i.strip().upper() for i in args.lemmas.split(",") if i.strip()]
    unknown = [i for i in ids if i not in verification.LEMMA_IDS]
    if unknown or not ids:
        raise UsageError(f"unknown lemma id(s): {', '.join(unknown) or '(none given)'}")
    scale = args.trials_scale

    def trials(default):
        return max(1, int(round(default * scale)))

    reports = verification.run_lemmas(
        ids, _seed(args),
        n=args.n, l=args.schedules,
        l1_l=args.concentration_schedules, l1_J=args.concentration_jobs,
        l3_l=args.coupon_schedules, c1_K=args.secretary_iterations,
        l1_trials=trials(200_000), l2_trials=trials(20_000), l3_trials=trials(20_000),
        l4_trials=trials(100_000), c1_trials=trials(2000),
    )
    for r in reports:
        sys.stdout.write(r.to_json() + "\n")
    sys.stderr.write(_table(reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def cmd_bench(args) -> int:
    if args.jobs:
        pool = _load_pool(args)
    else:
        pool = datasets.generate_synthetic(datasets.SyntheticSpec(count=args.count, seed=_seed(args)))
    l, _ = _schedule_count(args)
    if len(args.k_values) < 2:
        raise UsageError("--k-values needs at least two values")
    rep = verification.check_runtime_scaling(pool, l, args.k_values, _seed(args), args.repeats)
    out = rep.as_dict()
    out["n"] = pool.n
    out["l"] = l
    sys.stdout.write(json.dumps(out, sort_keys=True, indent=2) + "\n")
    return EXIT_OK if rep.passed else EXIT_VERIFY


def _add_common(p, *, algo=False, iterations=True):
    p.add_argument("--jobs", required=True, help="jobs CSV (id,cost[,location])")
    p.add_argument("--schedules", type=_positive, help="number of schedules l")
    p.add_argument("--horizon", type=float, nargs=3, metavar=("START", "FINISH", "UNIT"),
                   help="derive l from a time horizon instead of --schedules")
    p.add_argument("--location", help="only schedule jobs with this location tag")
    p.add_argument("--seed", type=_u64, help=f"master seed (falls back to ${SEED_ENV}, then 0)")
    p.add_argument("--threshold", type=float, help="OffPSP per-schedule threshold (default total/l)")
    p.add_argument("--iterations", type=_positive, default=DEFAULT_ITERATIONS, help="K random allocations")
    p.add_argument("--tie-mode", choices=("paper", "first"), default="paper")
    p.add_argument("--strict-order", action="store_true", help="also shuffle job order every iteration")
    p.add_argument("--retain-all", action="store_true", help="keep every iteration's assignment in memory")
    p.add_argument("--workers", type=_positive, default=1)
    if algo:
        p.add_argument("--algo", choices=("ppsjbp", "offpsp"), required=True)
        p.add_argument("--inject-assignments", metavar="FILE",
                       help="TESTING ONLY: use fixed per-iteration assignments instead of sampling")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="balsched", description="Balanced job scheduling by repeated random allocation.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("generate", help="synthetic job pool")
    p.add_argument("--count", type=_positive, default=200)
    p.add_argument("--cost-min", type=_positive, default=1)
    p.add_argument("--cost-max", type=_positive, default=100)
    p.add_argument("--seed", type=_u64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest-bus", help="bus driver durations -> jobs CSV")
    p.add_argument("raw")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest_bus)

    p = sub.add_parser("ingest-kdd", help="course activity log -> jobs CSV")
    p.add_argument("raw")
    p.add_argument("--top-students", type=_positive, default=30)
    p.add_argument("--per-course", action="store_true", help="difference timestamps within each course only")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest_kdd)

    p = sub.add_parser("schedule", help="run one algorithm")
    _add_common(p, algo=True)
    p.add_argument("--csv", metavar="DIR")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("compare", help="run both algorithms on the same pool")
    _add_common(p)
    p.add_argument("--csv", metavar="DIR")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("random-sets", help="balanced set vs randomly drawn iterations")
    _add_common(p)
    p.add_argument("--k-prime", type=_positive, default=4)
    p.set_defaults(func=cmd_random_sets)

    p = sub.add_parser("verify", help="Monte Carlo checks of the probabilistic guarantees")
    p.add_argument("--lemmas", default=",".join(verification.LEMMA_IDS))
    p.add_argument("--seed", type=_u64)
    p.add_argument("--n", type=_positive, default=200, help="jobs for L2/L4")
    p.add_argument("--schedules", type=_positive, default=4, help="schedules for L2/L4")
    p.add_argument("--concentration-schedules", type=_positive, default=3)
    p.add_argument("--concentration-jobs", type=_positive, default=3)
    p.add_argument("--coupon-schedules", type=_positive, default=4)
    p.add_argument("--secretary-iterations", type=_positive, default=4000)
    p.add_argument("--trials-scale", type=float, default=1.0, help="multiply every default trial count")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="allocation wall time for several K")
    p.add_argument("--jobs")
    p.add_argument("--count", type=_positive, default=200, help="synthetic pool size when --jobs is absent")
    p.add_argument("--schedules", type=_positive, default=4)
    p.add_argument("--horizon", type=float, nargs=3, metavar=("START", "FINISH", "UNIT"))
    p.add_argument("--k-values", type=_int_list, default=[4000, 8000])
    p.add_argument("--repeats", type=_positive, default=5)
    p.add_argument("--seed", type=_u64)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"balsched: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as exc:
        print(f"balsched: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IngestionError as exc:
        print(f"balsched: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"balsched: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
