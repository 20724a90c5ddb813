import numpy as np
import pytest

from su11sim.detection import DetectorKernel
from su11sim.interferometer import preset

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion and assert it; lines are echoed in the terminal summary."""

    def record(name, passed, detail=""):
        _CRITERIA.append((name, bool(passed), detail))
        assert passed, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def unbalanced():
    return preset("paper-unbalanced")


@pytest.fixture
def balanced():
    return preset("paper-balanced")


@pytest.fixture
def slow_kernel(unbalanced):
    dt = unbalanced.pulse_train.delta_t
    return DetectorKernel.square(25 * dt, dt / 16)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)
