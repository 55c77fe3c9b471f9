import math

import numpy as np
import pytest
from conftest import random_bags

from mind.altreps import MilesParams, miles_rep, minimax_rep, training_instances
from mind.data import Bag, Label, MILDataset


def test_minimax_examples():
    single = MILDataset([Bag("s", [[3.0, -1.0]], Label.POSITIVE)])
    np.testing.assert_array_equal(minimax_rep(single).values, [[3.0, -1.0, 3.0, -1.0]])
    two = MILDataset([Bag("t", [[0.0, 1.0], [2.0, -1.0]], Label.NEGATIVE)])
    np.testing.assert_array_equal(minimax_rep(two).values, [[0.0, -1.0, 2.0, 1.0]])


def test_miles_examples():
    data = MILDataset([Bag("a", [[0.0]], Label.POSITIVE)])
    t = miles_rep(data, [[10.0], [0.0]], MilesParams(10.0))
    assert t.values[0, 0] == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert t.values[0, 1] == 1.0


def test_column_counts(rng):
    data = random_bags(rng, 6, d=3)
    inst, names = training_instances(data)
    assert miles_rep(data, inst, instance_names=None).shape[1] == sum(b.size for b in data)
    assert len(names) == inst.shape[0]
    assert minimax_rep(data).shape[1] == 6


def test_instance_order_invariance(rng):
    data = random_bags(rng, 5, d=2, max_size=6)
    shuffled = MILDataset([Bag(b.id, b.instances[rng.permutation(b.size)], b.label)
                           for b in data])
    inst, _ = training_instances(data)
    assert minimax_rep(data).values.tobytes() == minimax_rep(shuffled).values.tobytes()
    assert miles_rep(data, inst).values.tobytes() == miles_rep(shuffled, inst).values.tobytes()


def test_miles_values_in_unit_interval(rng):
    data = random_bags(rng, 6)
    inst, _ = training_instances(data)
    v = miles_rep(data, inst, MilesParams(2.0)).values
    assert np.all((v > 0) & (v <= 1))
