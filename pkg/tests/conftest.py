"""Per-criterion pass/fail summary for the acceptance suite."""

from __future__ import annotations

_CRITERIA: dict[str, tuple[int, str]] = {}
_OUTCOMES: dict[int, bool] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _CRITERIA[item.nodeid] = (int(mark.args[0]), str(mark.args[1]))


def pytest_runtest_logreport(report):
    info = _CRITERIA.get(report.nodeid)
    if info is None:
        return
    number = info[0]
    ok = _OUTCOMES.get(number, True)
    if report.failed or (report.when == "call" and report.skipped):
        ok = False
    _OUTCOMES[number] = ok


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    titles = {num: title for num, title in _CRITERIA.values()}
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        status = "PASS" if _OUTCOMES[number] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {titles[number]}")
