"""Collects acceptance-criterion outcomes and prints one line per criterion."""

from collections import defaultdict

_results = defaultdict(list)
_titles = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _titles[number] = title
            item.user_properties.append(("criterion", number))


def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    if report.when == "call" or report.failed or report.skipped:
        _results[number].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _titles:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_titles):
        outcomes = _results.get(number, [])
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        terminalreporter.write_line(f"{status:7} criterion {number}: {_titles[number]}")
