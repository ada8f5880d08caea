import pytest

from primeboost.primes import build_prime_table

_acceptance = {}


@pytest.fixture(scope="session")
def table():
    return build_prime_table(10**4)


@pytest.fixture(scope="session")
def big_table():
    return build_prime_table(10**6)


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid and (report.when == "call" or report.outcome != "passed"):
        _acceptance.setdefault(report.nodeid, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _acceptance.items():
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
