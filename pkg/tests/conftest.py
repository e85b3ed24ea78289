import time

import pytest

from nlscrit import harness

ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)


SWEEP = harness.DEFAULT_EPSILONS


@pytest.fixture(scope="session")
def sy_study():
    """Satsuma-Yajima runs for the default eps grid, all snapshot times at once."""
    st = harness.get_study("satsuma_yajima", {"A0": 1.0})
    t0 = time.perf_counter()
    st.prepare(SWEEP, harness.EXPERIMENTS)
    st.sweep_seconds = time.perf_counter() - t0
    return st


@pytest.fixture(scope="session")
def ns_study():
    st = harness.get_study("nonsymmetric", {"alpha": 0.1})
    t0 = time.perf_counter()
    st.prepare(SWEEP, ("semiclassical_halftime", "critical_time"))
    st.sweep_seconds = time.perf_counter() - t0
    return st
