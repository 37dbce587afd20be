import pytest

_RESULTS = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _RESULTS[item.nodeid] = (mark.kwargs["number"], mark.kwargs["name"], mark.kwargs["limit"],
                                 rep.passed, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, limit, passed, duration in sorted(_RESULTS.values()):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(
            f"{status}  [{number:2d}] {name}  ({duration:.2f} s, limit {limit:g} s)")
