import sys
from pathlib import Path

import pytest

from aqcsim import _kernels
from aqcsim.cnf import paper_instance

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(params=_kernels.BACKENDS)
def backend(request):
    with _kernels.use_backend(request.param):
        yield request.param


@pytest.fixture
def paper():
    return paper_instance()


@pytest.fixture
def unsat3():
    # every sign pattern over x1..x3: each assignment falsifies exactly one clause
    from aqcsim.cnf import CnfInstance

    clauses = [
        tuple(v if (pattern >> (v - 1)) & 1 else -v for v in (1, 2, 3))
        for pattern in range(8)
    ]
    return CnfInstance.from_ints(3, clauses)


# -- acceptance report ------------------------------------------------------

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(tag, text): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        tag, text = marker.args
        _criteria.append((tag, text, report.outcome, f"{report.duration:.2f}s"))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for tag, text, outcome, duration in sorted(_criteria, key=lambda c: int(c[0][2:])):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {tag:5s} {text}  ({duration})")
