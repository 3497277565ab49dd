import os
from collections import OrderedDict

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_criteria = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion id")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    entry = _criteria.setdefault(n, {"title": title, "passed": 0, "failed": [], "skipped": 0})
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        if rep.passed and rep.when == "call":
            entry["passed"] += 1
        elif rep.skipped:
            entry["skipped"] += 1
        elif rep.failed:
            entry["failed"].append(item.callspec.id if hasattr(item, "callspec") else item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        e = _criteria[n]
        status = "FAIL" if e["failed"] else ("PASS" if e["passed"] else "SKIP")
        extra = f" (failing: {', '.join(e['failed'])})" if e["failed"] else ""
        tr.write_line(f"criterion {n:2d} {status}: {e['title']} "
                      f"[{e['passed']} passed, {len(e['failed'])} failed]{extra}")
