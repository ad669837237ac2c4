import numpy as np
import pytest
from hypothesis import settings

from toric_gk import MomentPolytope, guillemin_potential

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)


@pytest.fixture
def acceptance_line():
    def record(number, label, passed, detail):
        status = "PASS" if passed else "FAIL"
        ACCEPTANCE_LINES.append(f"criterion {number}: {status}  {label}  ({detail})")
        return passed
    return record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def cp1():
    return guillemin_potential(MomentPolytope.segment(0.0, 1.0))


@pytest.fixture(scope="session")
def square():
    return MomentPolytope.box([0.0, 0.0], [1.0, 1.0])
