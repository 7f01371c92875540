import pytest

_results: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    n, title = marker
    rec = _results.setdefault(n, {"title": title, "ok": True, "ran": False})
    if report.when == "call" or report.failed:
        rec["ran"] = True
        rec["ok"] &= not report.failed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("acceptance")
    if m is not None:
        outcome.get_result().criterion = tuple(m.args)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_results):
        rec = _results[n]
        status = "PASS" if rec["ok"] and rec["ran"] else "FAIL"
        tr.write_line(f"criterion {n:2d}: {status}  {rec['title']}")
