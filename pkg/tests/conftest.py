import numpy as np
import pytest

from ramml import RegressionData, load_aircraft, load_starscyg


@pytest.fixture(scope="session")
def stars():
    return load_starscyg()


@pytest.fixture(scope="session")
def aircraft():
    return load_aircraft()


def make_data(n, m, seed, noise=1.0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, m))
    y = 1.0 + X @ np.linspace(0.5, 1.5, m) + noise * rng.standard_normal(n)
    return RegressionData(y, X)
