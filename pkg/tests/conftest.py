import pytest

from gatesim import harness
from gatesim.fitting import build_dataset, default_training_depths
from gatesim.motor import MotorParams, default_flight_model, energy_coefficients


@pytest.fixture(scope="session")
def coeffs():
    return energy_coefficients(MotorParams())


@pytest.fixture(scope="session")
def flight(coeffs):
    return default_flight_model(coeffs)


@pytest.fixture(scope="session")
def dataset(coeffs, flight):
    return build_dataset(default_training_depths(), coeffs, flight)


@pytest.fixture(scope="session")
def quick_models():
    # Reduced epochs keep unit tests fast; the acceptance suite trains fully.
    return harness.build_default_models(epochs=300)
