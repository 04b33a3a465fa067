"""Shared fixtures and the acceptance-criteria reporter.

Tests marked ``@pytest.mark.acceptance("<criterion>")`` get one PASS/FAIL
line per criterion in the terminal summary.
"""

import numpy as np
import pytest

_RESULTS: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): acceptance criterion covered by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.args[0]
    _RESULTS[label] = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for label, status in _RESULTS.items():
        terminalreporter.write_line(f"ACCEPTANCE {status}: {label}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
