import json

import pytest

from balsched.cli import main
from balsched.model import read_jobs_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_example1_golden_json(capsys, fixtures):
    code, out, _ = run(
        capsys, "schedule", "--jobs", str(fixtures / "example1_jobs.csv"), "--algo", "ppsjbp",
        "--horizon", "0", "900", "300", "--inject-assignments", str(fixtures / "example1_assignments.csv"),
    )
    assert code == 0
    assert out == (fixtures / "example1_report.json").read_text(encoding="utf-8")
    report = json.loads(out)
    assert report["variance"] == 3
    assert [r["total_cost"] for r in report["per_schedule"]] == [15, 12, 12]


def test_offpsp_schedule(capsys, fixtures, tmp_path):
    code, out, _ = run(
        capsys, "schedule", "--jobs", str(fixtures / "offpsp_jobs.csv"), "--algo", "offpsp",
        "--schedules", "2", "--threshold", "55", "--csv", str(tmp_path),
    )
    assert code == 0
    report = json.loads(out)
    assert [r["job_count"] for r in report["per_schedule"]] == [5, 1]
    assert report["per_schedule"][0]["total_cost"] == 86
    assert (tmp_path / "offpsp_schedules.csv").read_text().splitlines()[0] == "index,total_cost,job_count,avg_cost"


def test_no_arguments_is_usage_error(capsys):
    code, _, err = run(capsys)
    assert code == 64 and "usage" in err


def test_missing_flags_exit_64(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["schedule"])
    assert exc.value.code == 64


def test_bad_params_exit_64(capsys, fixtures):
    code, _, _ = run(capsys, "schedule", "--jobs", str(fixtures / "example1_jobs.csv"), "--algo", "ppsjbp")
    assert code == 64  # neither --schedules nor --horizon
    code, _, _ = run(
        capsys, "schedule", "--jobs", str(fixtures / "example1_jobs.csv"), "--algo", "ppsjbp",
        "--horizon", "0", "1000", "300",
    )
    assert code == 64


def test_parse_failure_exit_2_with_line(capsys, tmp_path):
    bad = tmp_path / "jobs.csv"
    bad.write_text("id,cost\na,1\nb,zz\n", encoding="utf-8")
    code, _, err = run(capsys, "schedule", "--jobs", str(bad), "--algo", "offpsp", "--schedules", "2")
    assert code == 2 and "line 3" in err


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, _ = run(capsys, "schedule", "--jobs", str(tmp_path / "nope.csv"), "--algo", "offpsp", "--schedules", "2")
    assert code == 2


def test_generate_and_env_seed(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv("BALSCHED_SEED", "123")
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(["generate", "--count", "20", "--out", str(a)]) == 0
    assert main(["generate", "--count", "20", "--seed", "123", "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()
    assert read_jobs_csv(a).n == 20


def test_bad_env_seed(capsys, monkeypatch):
    monkeypatch.setenv("BALSCHED_SEED", "not-a-number")
    code, _, _ = run(capsys, "generate", "--count", "3")
    assert code == 64


def test_compare_equal_jobs(capsys, tmp_path):
    jobs = tmp_path / "eq.csv"
    jobs.write_text("id,cost\na,5\nb,5\nc,5\nd,5\n", encoding="utf-8")
    code, out, _ = run(capsys, "compare", "--jobs", str(jobs), "--schedules", "4", "--iterations", "500",
                       "--csv", str(tmp_path / "out"))
    assert code == 0
    report = json.loads(out)
    assert report["ppsjbp"]["variance"] == 0
    assert [r["job_count"] for r in report["ppsjbp"]["per_schedule"]] == [1, 1, 1, 1]
    assert report["deltas"]["variance_ratio_offpsp_over_ppsjbp"] is None
    assert (tmp_path / "out" / "compare.csv").exists()


def test_random_sets_boundary(capsys, fixtures):
    code, out, _ = run(capsys, "random-sets", "--jobs", str(fixtures / "offpsp_jobs.csv"), "--schedules", "2",
                       "--iterations", "9", "--k-prime", "4", "--seed", "3")
    assert code == 0
    rec = json.loads(out)
    others = rec["first_random_sets"] + rec["second_random_sets"]
    assert len(others) == 8
    assert all(rec["balanced"]["variance"] <= o["variance"] for o in others)
    iters = [o["iteration"] for o in others]
    assert len(set(iters)) == 8 and rec["balanced"]["iteration"] not in iters


def test_random_sets_k_too_small(capsys, fixtures):
    code, _, _ = run(capsys, "random-sets", "--jobs", str(fixtures / "offpsp_jobs.csv"), "--schedules", "2",
                     "--iterations", "8", "--k-prime", "4")
    assert code == 64


def test_verify_small(capsys):
    code, out, err = run(capsys, "verify", "--lemmas", "L2,L3", "--coupon-schedules", "1", "--trials-scale", "0.1")
    assert code == 0
    rows = [json.loads(line) for line in out.splitlines()]
    assert [r["lemma_id"] for r in rows] == ["L2", "L3"]
    assert rows[0]["predicted"] == 50 and rows[0]["pass"]
    assert rows[1]["predicted"] == 1 and rows[1]["pass"]
    assert "PASS" in err


def test_verify_unknown_lemma(capsys):
    code, _, _ = run(capsys, "verify", "--lemmas", "L7")
    assert code == 64


def test_verify_failure_exit_1(capsys, monkeypatch):
    from balsched import verification

    original = verification.run_lemmas

    def failing(*a, **k):
        reps = original(*a, **k)
        reps[0].passed = False
        return reps

    monkeypatch.setattr(verification, "run_lemmas", failing)
    code, _, _ = run(capsys, "verify", "--lemmas", "L2", "--trials-scale", "0.05")
    assert code == 1


def test_ingest_commands(capsys, fixtures, tmp_path):
    out = tmp_path / "bus.csv"
    assert main(["ingest-bus", str(fixtures / "bus_20rows.csv"), "--out", str(out)]) == 0
    assert out.read_text() == (fixtures / "bus_20rows_expected.csv").read_text()
    out = tmp_path / "kdd.csv"
    assert main(["ingest-kdd", str(fixtures / "kdd_sample.csv"), "--out", str(out)]) == 0
    assert out.read_text() == (fixtures / "kdd_sample_expected.csv").read_text()


def test_location_filter(capsys, tmp_path):
    jobs = tmp_path / "loc.csv"
    jobs.write_text("id,cost,location\na,5,x\nb,7,y\nc,1,x\n", encoding="utf-8")
    code, out, _ = run(capsys, "schedule", "--jobs", str(jobs), "--algo", "ppsjbp", "--schedules", "2",
                       "--iterations", "50", "--location", "x")
    assert code == 0
    assert sum(r["job_count"] for r in json.loads(out)["per_schedule"]) == 2
