import numpy as np
import pytest

from tnsynth.waterwire import Grid1D, WireScenario, pentamer_scenario, scenario_state


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def pentamer_model():
    """The coupled 8^4 model scenario; its diagonalization is the slowest step in the suite."""
    scenario = WireScenario(4, grid=Grid1D(8))
    return scenario, scenario_state(scenario), pentamer_scenario(scenario)


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_complex(rng, (n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, n):
    a = random_complex(rng, (n, n))
    return (a + a.conj().T) / 2
