"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_RESULTS: dict[str, tuple[str, bool]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    cid, title = mark.args
    failed = rep.failed or (rep.when == "call" and rep.skipped)
    prev = _RESULTS.get(cid, (title, True))
    if rep.when == "call" or failed:
        _RESULTS[cid] = (title, prev[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_RESULTS, key=lambda c: int(c.lstrip("AC"))):
        title, ok = _RESULTS[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {cid} {title}")
