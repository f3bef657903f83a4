from hypothesis import HealthCheck, settings

settings.register_profile(
    "artifact", deadline=None, derandomize=True, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("artifact")

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _RESULTS[n] = (title, "PASS" if rep.passed else "FAIL", rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, status, secs = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d} {status}  {title}  ({secs:.1f}s)")
