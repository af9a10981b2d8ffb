import pytest

from zagier_check.curve_group import build_point_table
from zagier_check.local_heights import height_matrix
from zagier_check.relation_finder import build_system, integer_kernel

D = 100


@pytest.fixture(scope="session")
def table():
    return build_point_table()


@pytest.fixture(scope="session")
def heights(table):
    return height_matrix(table, D)


@pytest.fixture(scope="session")
def system(table, heights):
    return build_system(table, heights)


@pytest.fixture(scope="session")
def kernel(system):
    return integer_kernel(system.exact_rows, 22)


VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(criterion: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        print(line)
        request.config.stash[VERDICTS].append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
