import numpy as np
import pytest

from dgff.graph import make_random


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_graph():
    return make_random(10, 0.35, seed=7)


@pytest.fixture
def small_digraph():
    return make_random(10, 0.35, seed=7, directed=True)
