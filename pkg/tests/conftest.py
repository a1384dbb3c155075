import numpy as np
import pytest

from dnet import (Grid, Signature, guichard_generate, omega_from_darboux_pair,
                  random_isothermic, standard_lie_frame)


@pytest.fixture(scope="session")
def net41():
    rng = np.random.default_rng(7)
    return random_isothermic(Grid([6, 6]), Signature(4, 1), rng)


@pytest.fixture(scope="session")
def net42():
    rng = np.random.default_rng(7)
    return random_isothermic(Grid([6, 6]), Signature(4, 2), rng)


@pytest.fixture(scope="session")
def omega_net(net42):
    rng = np.random.default_rng(5)
    return omega_from_darboux_pair(net42, rng=rng)


@pytest.fixture(scope="session")
def guichard():
    return guichard_generate([5, 5], seed=1)


@pytest.fixture(scope="session")
def lie_frame():
    return standard_lie_frame()
