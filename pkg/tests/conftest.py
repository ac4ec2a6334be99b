import numpy as np
import pytest

from unitfit import datasets


@pytest.fixture(scope="session")
def quality():
    return np.array(datasets.builtin("quality").values)


@pytest.fixture(scope="session")
def pumps():
    return np.array(datasets.builtin("pumps").values)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
