import numpy as np
import pytest

from eitprop.physics import CouplingProfile, MediumParams, ProbeEnvelope, TimeGrid


@pytest.fixture(scope="session")
def hump_probe():
    return ProbeEnvelope("double_gaussian", (0.012, 0.01), (750.0, 1000.0), (100.0, 100.0))


@pytest.fixture(scope="session")
def hump_coupling():
    # Gamma_1 = 0.4
    return CouplingProfile("constant", amplitude=np.sqrt(0.4))


@pytest.fixture(scope="session")
def medium():
    return MediumParams()


@pytest.fixture(scope="session")
def hump_grid():
    return TimeGrid(0.0, 3000.0, 4096)


@pytest.fixture(scope="session")
def storage_coupling():
    return CouplingProfile("piecewise", amplitude=1.0)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one summary line per acceptance criterion."""

    def record(number, passed, text):
        ACCEPTANCE_LINES.append((number, "PASS" if passed else "FAIL", text))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {text}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, text in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {text}")
