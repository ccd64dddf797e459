"""Per-criterion PASS/FAIL summary for tests marked ``criterion(k, text)``."""

import pytest

_RESULTS: dict = {}
_TEXT: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, text): acceptance criterion k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    k = mark.args[0]
    if len(mark.args) > 1:
        _TEXT[k] = mark.args[1]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        # an expected failure still means the literal statement does not hold
        ok = rep.passed and not hasattr(rep, "wasxfail")
        _RESULTS.setdefault(k, []).append((item.name, ok))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_RESULTS):
        parts = _RESULTS[k]
        bad = [name for name, ok in parts if not ok]
        status = "PASS" if not bad else "FAIL"
        line = f"{status} criterion {k}: {_TEXT.get(k, '')}"
        if bad:
            line += f" (not met: {', '.join(bad)})"
        tr.write_line(line)
