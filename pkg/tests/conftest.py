import math

import pytest

from pilotnonlocal import CouplingProfile, MeasurementSettings, singlet_amplitudes


@pytest.fixture
def singlet():
    def make(theta_A=0.0, theta_B=0.0, mode="von-neumann"):
        return singlet_amplitudes(MeasurementSettings(theta_A, theta_B, mode))

    return make


@pytest.fixture
def equal():
    return CouplingProfile(1.0, 1.0)


@pytest.fixture
def a_twice_b():
    return CouplingProfile(2.0, 1.0)


R2 = 1 / math.sqrt(2)
