import pytest

from noisekit import devices
from noisekit.backend import MockBackend, MockGroundTruth
from noisekit.circuit import Circuit, DeviceTopology, cnot, h, measure


@pytest.fixture
def line2():
    return devices.line(2)


@pytest.fixture
def line3():
    return devices.line(3)


@pytest.fixture
def line4():
    return devices.line(4)


@pytest.fixture
def ladder20():
    return devices.ladder20()


@pytest.fixture
def bell_circuit():
    return Circuit(2, 2, (h(0), cnot(0, 1), measure(0, 0), measure(1, 1)), "bell:q0-q1")


@pytest.fixture
def paper_truth(line4):
    """Mock ground truth at the register-average magnitudes."""
    return MockGroundTruth(devices.uniform_truth(line4))


@pytest.fixture
def mock_backend(line4, paper_truth):
    return MockBackend(line4, paper_truth)
