import numpy as np
import pytest

from fwkm import drop_zero_range, generate_synthetic, standardize_numeric, SyntheticConfig
from fwkm.fixtures import load_fixture


@pytest.fixture(scope="session")
def iris_raw():
    return load_fixture("iris")


@pytest.fixture(scope="session")
def iris(iris_raw):
    return standardize_numeric(drop_zero_range(iris_raw))


@pytest.fixture(scope="session")
def wine():
    return standardize_numeric(drop_zero_range(load_fixture("wine")))


@pytest.fixture(scope="session")
def synth_200x8_3():
    """The small synthetic fixture used by the property suites."""
    d, _ = generate_synthetic(SyntheticConfig(200, 8, 3), seed=4242)
    return standardize_numeric(drop_zero_range(d))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
