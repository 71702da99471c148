import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from symcon.fixtures import load_fixture, load_x0  # noqa: E402
from symcon.pipeline import run_pipeline  # noqa: E402

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=50)
settings.load_profile("repo")

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion checked by the test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = _MARKERS.get(report.nodeid)
    if marker is None:
        return
    number, text = marker
    why = ""
    if report.failed:
        crash = getattr(report.longrepr, "reprcrash", None)
        why = crash.message.splitlines()[0] if crash is not None else report.longreprtext.splitlines()[-1]
    _CRITERIA[number] = (text, report.outcome, why)


_MARKERS: dict = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _MARKERS[item.nodeid] = (m.args[0], m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        text, outcome, why = _CRITERIA[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {number:2d} {status}: {text}"
        tr.write_line(line + (f"  [{why}]" if why else ""))
    passed = sum(1 for _, o, _ in _CRITERIA.values() if o == "passed")
    tr.write_line(f"{passed}/{len(_CRITERIA)} criteria pass")


@pytest.fixture(scope="session")
def net8():
    return load_fixture("net8")


@pytest.fixture(scope="session")
def net48():
    return load_fixture("net48")


@pytest.fixture(scope="session")
def run8(net8):
    return run_pipeline(net8, targets=-2.0, tf=5.0, x0=load_x0("net8"))


@pytest.fixture(scope="session")
def run48(net48):
    return run_pipeline(net48, targets=-10.0, tf=1.0, x0=load_x0("net48"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
