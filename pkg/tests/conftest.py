import math

import pytest

from bloch_thermo.bloch import LocalField
from bloch_thermo.cycles import CarnotSpec, OttoSpec


@pytest.fixture
def zfield():
    return LocalField.along_z(1.0)


@pytest.fixture
def otto_bench():
    return OttoSpec(theta1=math.pi / 3, theta2=math.pi / 6, B0=0.4, B1=0.8)


@pytest.fixture
def carnot_bench():
    return CarnotSpec(T_H=0.6, T_L=0.3, B0=0.4, B1=0.8)


_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion exercised by a test")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call" and call.excinfo is None:
        return
    n, text = mark.args
    ok = call.excinfo is None
    prev = _CRITERIA.get(n, (text, True))
    _CRITERIA[n] = (text, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        text, ok = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {text}")
