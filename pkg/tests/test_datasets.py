import io
import random
from datetime import datetime, timedelta

import pandas as pd
import pytest

from balsched.datasets import (
    EVENTS,
    SyntheticSpec,
    generate_synthetic,
    ingest_bus_driver,
    ingest_kdd_logs,
    parse_bus_driver,
    parse_kdd_logs,
)
from balsched.model import ConfigurationError, IngestionError, read_jobs_csv

KDD_HEADER = "enroll_id,date,time,event,course_id\n"


def test_synthetic_bounds_and_ids():
    pool = generate_synthetic(SyntheticSpec(count=5, cost_min=3, cost_max=9, seed=1))
    assert pool.n == 5
    assert pool.ids == ("γ_1", "γ_2", "γ_3", "γ_4", "γ_5")
    assert all(3 <= j.cost <= 9 and float(j.cost).is_integer() for j in pool)


def test_synthetic_deterministic():
    spec = SyntheticSpec(count=200, seed=77)
    assert generate_synthetic(spec) == generate_synthetic(spec)
    assert generate_synthetic(spec) != generate_synthetic(SyntheticSpec(count=200, seed=78))


def test_synthetic_degenerate_range():
    pool = generate_synthetic(SyntheticSpec(count=1, cost_min=10, cost_max=10))
    assert [j.cost for j in pool] == [10]


@pytest.mark.parametrize("kwargs", [{"count": 0}, {"cost_min": 5, "cost_max": 4}, {"cost_min": 0}])
def test_synthetic_spec_checks(kwargs):
    with pytest.raises(ConfigurationError):
        SyntheticSpec(**kwargs)


# -- bus ---------------------------------------------------------------------


def test_bus_fixture_round_trip(fixtures):
    pool, report = ingest_bus_driver(fixtures / "bus_20rows.csv")
    expected = read_jobs_csv(fixtures / "bus_20rows_expected.csv")
    assert pool == expected
    assert report.rows_read == 20 and report.rows_rejected == 0
    assert pool.cost_of("1") == 1145
    assert pool.cost_of("3") == 850 and pool.cost_of("5") == 840


@pytest.mark.parametrize("sep", [",", ";", "\t"])
def test_bus_grouping_any_delimiter(sep):
    text = sep.join(["Bus_Line_Id", "Extra", "Duration"]) + "\n"
    text += "\n".join(sep.join(r) for r in [("A", "x", "10"), ("A", "y", "20"), ("B", "z", "5")]) + "\n"
    pool, _ = parse_bus_driver(io.StringIO(text))
    assert [(j.id, j.cost) for j in pool] == [("A", 30), ("B", 5)]


def test_bus_clock_durations():
    pool, _ = parse_bus_driver(io.StringIO("Bus_Line_Id,Duration\n1,1:30\n1,00:15:30\n"))
    assert pool.cost_of("1") == pytest.approx(105.5)


def test_bus_negative_rows_rejected():
    pool, report = parse_bus_driver(io.StringIO("Bus_Line_Id,Duration\n1,10\n1,-4\n2,oops\n2,7\n"))
    assert [(j.id, j.cost) for j in pool] == [("1", 10), ("2", 7)]
    assert report.rows_rejected == 2
    assert any("negative" in w for w in report.warnings)


def test_bus_missing_columns():
    with pytest.raises(IngestionError, match="Duration"):
        parse_bus_driver(io.StringIO("Bus_Line_Id,Minutes\n1,10\n"))


def test_bus_idempotent(fixtures):
    assert ingest_bus_driver(fixtures / "bus_20rows.csv")[0] == ingest_bus_driver(fixtures / "bus_20rows.csv")[0]


# -- course logs --------------------------------------------------------------


def test_kdd_sample_fixture(fixtures):
    pool, report = ingest_kdd_logs(fixtures / "kdd_sample.csv")
    assert pool == read_jobs_csv(fixtures / "kdd_sample_expected.csv")
    assert pool.cost_of("81UZ:navigate") == 10
    assert pool.cost_of("81UZ:access") == 15
    assert pool.cost_of("81UZ:video") == 4
    assert report.extra["students_selected"] == 3


def test_kdd_single_entry_costs_zero():
    pool, _ = parse_kdd_logs(io.StringIO(KDD_HEADER + "1,2014-01-01,10:00:00,video,C1\n"))
    assert [(j.id, j.cost) for j in pool] == [("C1:video", 0)]


def test_kdd_sixty_seconds_is_one_minute():
    log = KDD_HEADER + "1,2014-01-01,10:00:00,video,C1\n1,2014-01-01,10:01:00,video,C1\n"
    pool, _ = parse_kdd_logs(io.StringIO(log))
    assert pool.cost_of("C1:video") == 1


def test_kdd_minutes_floored_after_summing():
    log = KDD_HEADER + "".join(
        f"1,2014-01-01,10:00:{s:02d},video,C1\n" for s in (0, 40, 50)
    ) + "1,2014-01-01,10:01:20,access,C1\n"
    # video: 40 + 10 + 30 = 80 s
    pool, _ = parse_kdd_logs(io.StringIO(log))
    assert pool.cost_of("C1:video") == 1


def test_kdd_rows_sorted_by_time_and_bad_rows_rejected():
    log = KDD_HEADER + (
        "1,2014-01-01,10:05:00,access,C1\n"
        "1,2014-01-01,10:00:00,video,C1\n"
        "1,2014-01-01,25:00:00,video,C1\n"
        "1,2014-01-01,10:06:00,dance,C1\n"
    )
    pool, report = parse_kdd_logs(io.StringIO(log))
    assert pool.cost_of("C1:video") == 5
    assert report.rows_rejected == 2


def test_kdd_per_student_vs_per_course_streams():
    log = KDD_HEADER + (
        "1,2014-01-01,10:00:00,video,A\n"
        "1,2014-01-01,10:03:00,video,B\n"
        "1,2014-01-01,10:10:00,video,A\n"
    )
    per_student, _ = parse_kdd_logs(io.StringIO(log))
    assert per_student.cost_of("A:video") == 3 and per_student.cost_of("B:video") == 7
    per_course, _ = parse_kdd_logs(io.StringIO(log), per_course=True)
    assert per_course.cost_of("A:video") == 10 and per_course.cost_of("B:video") == 0


def test_kdd_top_students_include_ties():
    rows = []
    # student s1 enrolled in 3 courses, s2 and s3 in 2, s4 in 1
    for sid, courses in [("s1", "ABC"), ("s2", "AB"), ("s3", "BC"), ("s4", "D")]:
        for k, c in enumerate(courses):
            rows.append(f"{sid},2014-01-01,10:0{k}:00,video,{c}\n")
    pool, report = parse_kdd_logs(io.StringIO(KDD_HEADER + "".join(rows)), top_students=2)
    assert report.extra["students_selected"] == 3
    assert "D:video" not in pool.ids


def test_kdd_header_checked():
    with pytest.raises(IngestionError):
        parse_kdd_logs(io.StringIO("a,b,c\n"))


def _random_log(n_rows, seed):
    r = random.Random(seed)
    t0 = datetime(2014, 3, 1, 8, 0, 0)
    rows = []
    for _ in range(n_rows):
        ts = t0 + timedelta(seconds=r.randrange(0, 6 * 3600))
        rows.append((r.choice(["u1", "u2", "u3"]), ts, r.choice(EVENTS), r.choice(["C1", "C2", "C3"])))
    return rows


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_kdd_matches_pandas_groupby(seed):
    rows = _random_log(50, seed)
    text = KDD_HEADER + "".join(
        f"{s},{ts:%Y-%m-%d},{ts:%H:%M:%S},{e},{c}\n" for s, ts, e, c in rows
    )
    pool, _ = parse_kdd_logs(io.StringIO(text), top_students=30)

    df = pd.DataFrame(rows, columns=["student", "ts", "event", "course"]).reset_index()
    df = df.sort_values(["student", "ts", "index"])
    df["dur"] = (df.groupby("student")["ts"].shift(-1) - df["ts"]).dt.total_seconds().fillna(0)
    sums = df.groupby(["course", "event"])["dur"].sum() // 60
    expected = {f"{c}:{e}": float(v) for (c, e), v in sums.items()}
    assert {j.id: j.cost for j in pool} == expected
