from fractions import Fraction

import pytest

from regforge.tower import ConstructionParams, build_instance, build_tower

_acceptance = {}


@pytest.fixture(scope="session")
def params160():
    return ConstructionParams.custom(Fraction(1, 3), 3, 160, epsilon=Fraction(1, 100), seed=7)


@pytest.fixture(scope="session")
def tower160(params160):
    return build_tower(params160)


@pytest.fixture(scope="session")
def graph160(tower160):
    return build_instance(tower160)


@pytest.fixture(scope="session")
def tower8():
    return build_tower(ConstructionParams.custom(Fraction(1, 3), 3, 8, seed=1))


@pytest.fixture(scope="session")
def graph8(tower8):
    return build_instance(tower8)


def pytest_runtest_logreport(report):
    marker = "test_acceptance.py::test_criterion_"
    if marker not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.failed):
        _acceptance[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance, key=lambda s: int(s.split("_")[2])):
        terminalreporter.write_line(f"{_acceptance[name]:4}  {name}")
