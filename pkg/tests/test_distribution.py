import itertools
import logging
import math

import numpy as np
import pytest
from conftest import bag_pairs
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from mind.analysis import nmf
from mind.data import Bag, Label
from mind.distribution import CSParams, cs_divergence, emd, mahalanobis_dissim


def test_mahalanobis_hand_example():
    assert mahalanobis_dissim([[0.0], [2.0]], [[4.0], [6.0]], ridge=0.0) == 16.0


def test_mahalanobis_identical_bags():
    x = np.random.default_rng(0).normal(size=(6, 3))
    assert mahalanobis_dissim(x, x) == 0.0


def test_mahalanobis_affine_invariance():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(30, 3)), rng.normal(1.0, 1.5, size=(25, 3))
    A = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    t = rng.normal(size=3)
    before = mahalanobis_dissim(a, b, ridge=0.0)
    after = mahalanobis_dissim(a @ A.T + t, b @ A.T + t, ridge=0.0)
    assert after == pytest.approx(before, rel=1e-6)


@given(bag_pairs(max_dim=3))
def test_mahalanobis_exactly_symmetric(pair):
    a, b = pair
    try:
        v = mahalanobis_dissim(a, b)
    except np.linalg.LinAlgError:
        return
    assert v == mahalanobis_dissim(b, a)
    assert v >= 0


def test_mahalanobis_single_instance_is_flagged(caplog):
    with caplog.at_level(logging.INFO, logger="mind.distribution"):
        v = mahalanobis_dissim(Bag("s", [[0.0, 0.0]], Label.POSITIVE),
                               Bag("t", [[1.0, 0.0]], Label.NEGATIVE))
    assert v > 0
    assert any("single-instance" in r.message for r in caplog.records)


def test_cs_self_is_zero():
    x = np.random.default_rng(2).normal(size=(7, 2))
    assert cs_divergence(x, x, 1.3) == pytest.approx(0.0, abs=1e-12)


def test_cs_closed_form_examples():
    assert cs_divergence([[0.0]], [[2.0]], CSParams(1.0)) == pytest.approx(0.5, abs=1e-12)


@given(st.floats(-20, 20), st.floats(0.3, 5))
def test_cs_single_instance_closed_form(m, sigma):
    value = cs_divergence([[0.0]], [[m]], sigma)
    assert value == pytest.approx(m * m / (8 * sigma * sigma), abs=1e-9)


@given(bag_pairs(max_dim=3), st.floats(1.0, 5.0))
def test_cs_non_negative(pair, sigma):
    a, b = pair
    try:
        assert cs_divergence(a, b, sigma) >= -1e-9
    except FloatingPointError:
        pass


def test_cs_default_sigma_and_underflow():
    a, b = [[0.0, 0.0]], [[1.0, 1.0]]
    assert cs_divergence(a, b) == pytest.approx(2 / (8 * 2))
    with pytest.raises(FloatingPointError, match="kernel underflow; increase sigma"):
        cs_divergence([[0.0]], [[1e4]], 0.1)


def test_emd_examples():
    assert emd([[0.0]], [[1.0]])[0] == 1.0
    assert emd([[0.0], [2.0]], [[1.0]])[0] == 1.0
    x = np.random.default_rng(4).normal(size=(5, 2))
    cost, plan = emd(x, x)
    assert cost == 0.0
    assert plan.total_mass == pytest.approx(1.0)


def test_emd_instance_cap():
    with pytest.raises(ValueError, match="exceeds EMD limit"):
        emd(np.zeros((5, 1)), np.zeros((2, 1)), max_instances=4)


@given(bag_pairs(max_size=3, max_dim=4))
def test_emd_matches_vertex_enumeration(pair):
    a, b = pair
    cost, plan = emd(a, b)
    assert cost == pytest.approx(oracles.emd_by_vertices(a, b), abs=1e-9)
    flows = plan.matrix()
    np.testing.assert_allclose(flows.sum(axis=1), 1 / len(a), atol=1e-12)
    np.testing.assert_allclose(flows.sum(axis=0), 1 / len(b), atol=1e-12)


@given(bag_pairs(max_size=6, max_dim=3), st.randoms(use_true_random=False))
def test_emd_symmetric_and_permutation_invariant(pair, rnd):
    a, b = pair
    cost = emd(a, b)[0]
    assert cost == pytest.approx(emd(b, a)[0], abs=1e-9)
    pa = a[rnd.sample(range(len(a)), len(a))]
    pb = b[rnd.sample(range(len(b)), len(b))]
    assert emd(pa, pb)[0] == pytest.approx(cost, abs=1e-9)


@given(st.lists(arrays(np.float64, st.tuples(st.integers(1, 5), st.just(2)),
                       elements=st.floats(-5, 5)), min_size=3, max_size=6))
def test_emd_triangle_inequality_and_nmf_zero(bags):
    n = len(bags)
    D = np.array([[emd(bags[i], bags[j])[0] for j in range(n)] for i in range(n)])
    for i, j, k in itertools.permutations(range(n), 3):
        assert D[i, k] <= D[i, j] + D[j, k] + 1e-9
    assert nmf(D).nmf == 0.0
