import pytest

_CRITERIA = {}
_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _CRITERIA[item.nodeid] = (mark.args[0], mark.args[1])


def pytest_runtest_logreport(report):
    if report.nodeid not in _CRITERIA:
        return
    if report.when == "call" or report.failed:
        previous = _OUTCOMES.get(report.nodeid, "PASS")
        _OUTCOMES[report.nodeid] = "FAIL" if report.failed or previous == "FAIL" else "PASS"
        if report.skipped:
            _OUTCOMES[report.nodeid] = "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    per_number = {}
    for nodeid, (number, title) in _CRITERIA.items():
        outcome = _OUTCOMES.get(nodeid, "NOT RUN")
        state = per_number.setdefault(number, [title, "PASS"])
        if outcome != "PASS":
            state[1] = outcome if state[1] == "PASS" else state[1]
    terminalreporter.section("acceptance criteria")
    for number in sorted(per_number):
        title, outcome = per_number[number]
        terminalreporter.write_line(f"criterion {number:2d}: {outcome:<7} {title}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
