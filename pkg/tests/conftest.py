import re

import pytest

_CRITERION = re.compile(r"test_c(\d+)_")
_outcomes: dict[int, list[tuple[str, bool]]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    m = _CRITERION.search(report.nodeid.split("::")[-1])
    if m is None or "test_acceptance" not in report.nodeid:
        return
    _outcomes.setdefault(int(m.group(1)), []).append(
        (report.nodeid.split("::")[-1], report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        checks = _outcomes[number]
        ok = all(passed for _, passed in checks)
        failed = [name for name, passed in checks if not passed]
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'} ({len(checks)} checks)"
        if failed:
            line += "  failing: " + ", ".join(failed)
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240117)
