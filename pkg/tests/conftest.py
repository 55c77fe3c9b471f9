import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mind.data import Bag, Label, MILDataset

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

coords = st.floats(-10, 10, allow_nan=False, allow_infinity=False, width=64)


@st.composite
def bag_pairs(draw, max_dim=5, max_size=6):
    d = draw(st.integers(1, max_dim))
    a = draw(arrays(np.float64, (draw(st.integers(1, max_size)), d), elements=coords))
    b = draw(arrays(np.float64, (draw(st.integers(1, max_size)), d), elements=coords))
    return a, b


def random_bags(rng, n_bags, d=2, max_size=5, labelled=True):
    bags = []
    for k in range(n_bags):
        lab = (Label.POSITIVE if k % 2 == 0 else Label.NEGATIVE) if labelled else Label.UNKNOWN
        bags.append(Bag(f"b{k}", rng.normal(size=(int(rng.integers(1, max_size + 1)), d)), lab))
    return MILDataset(bags, d)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
