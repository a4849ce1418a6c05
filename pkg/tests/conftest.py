import pytest

from rdekit import Grid, SolveConfig, make_standard, solve

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def grid():
    return Grid()


@pytest.fixture(scope="session")
def fixed_points(grid):
    return {d: solve(SolveConfig(d=d, grid=grid, start="exp1")) for d in (1, 2, 3)}


@pytest.fixture(scope="session")
def logistic(grid):
    return make_standard("logistic", grid)


@pytest.fixture(scope="session")
def point_mass(grid):
    return make_standard("point_mass_at_0", grid)


@pytest.fixture(scope="session")
def exp1(grid):
    return make_standard("exp1", grid)


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""
    def _report(label, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
