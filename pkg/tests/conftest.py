"""Shared pytest plumbing: acceptance criteria get one summary line each."""

import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, desc): numbered acceptance criterion for the summary")
    config._criterion_results = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    key = (int(mark.args[0]), str(mark.args[1]))
    store = item.config._criterion_results
    if rep.when == "call":
        store[key] = store.get(key, True) and rep.passed
    elif rep.failed:
        store[key] = False


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_criterion_results", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num, desc in sorted(results):
        status = "PASS" if results[(num, desc)] else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {num}: {desc}")
