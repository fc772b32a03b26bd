import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=15, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)


# one PASS/FAIL line per acceptance criterion, printed after the run
_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    parts = name.split("_")
    key = (int(parts[2]), " ".join(parts[3:]))
    if report.failed:
        _ACCEPTANCE[key] = "FAIL"
    elif report.when == "call" and _ACCEPTANCE.get(key) != "FAIL":
        _ACCEPTANCE[key] = "PASS"
    elif report.skipped and key not in _ACCEPTANCE:
        _ACCEPTANCE[key] = "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (number, label), status in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"criterion {number:2d} {status}: {label}")
