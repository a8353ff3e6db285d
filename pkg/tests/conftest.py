from pathlib import Path

import pytest

from balsched.model import JobPool, read_jobs_csv

FIXTURES = Path(__file__).parent / "fixtures"

# jobs of the six-job worked example and their fixed assignments (1-based schedules)
EXAMPLE1_COSTS = [4, 2, 8, 1, 9, 15]
EXAMPLE1_ASSIGNMENTS = [
    [1, 3, 1, 2, 2, 1],
    [1, 3, 1, 2, 2, 3],
    [1, 3, 3, 3, 1, 2],
    [1, 2, 1, 2, 2, 3],
    [1, 1, 1, 2, 2, 3],
]
EXAMPLE1_TOTALS = [[27, 10, 2], [12, 10, 17], [13, 15, 11], [12, 12, 15], [14, 10, 15]]
EXAMPLE1_VARIANCES = [163, 13, 4, 3, 7]


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def example1_pool() -> JobPool:
    return read_jobs_csv(FIXTURES / "example1_jobs.csv")


@pytest.fixture
def example1_injected():
    import numpy as np

    return np.array(EXAMPLE1_ASSIGNMENTS) - 1


@pytest.fixture
def offpsp_pool() -> JobPool:
    return read_jobs_csv(FIXTURES / "offpsp_jobs.csv")


_acceptance_lines: list[str] = []


def record_criterion(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" -- {detail}" if detail else "")
    print(line)
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
