import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mind.data import (Bag, Label, MILDataset, dataset_summary, require_labels,
                       validate_dataset)


def test_consistent_two_bag_dataset_is_ok():
    data = MILDataset([Bag("a", [[0, 0], [1, 1]], Label.POSITIVE),
                       Bag("b", [[2, 2]], Label.NEGATIVE)])
    assert validate_dataset(data).ok


def test_empty_bag_is_reported():
    data = MILDataset([Bag("a", np.zeros((0, 2)), Label.POSITIVE),
                       Bag("b", [[2, 2]], Label.NEGATIVE)], dim=2)
    rules = [v.rule for v in validate_dataset(data).violations]
    assert rules == ["empty bag"]


def test_dimension_mismatch_is_reported():
    data = MILDataset([Bag("a", [[0, 0]], Label.POSITIVE),
                       Bag("b", [[1, 2, 3]], Label.NEGATIVE)], dim=2)
    check = validate_dataset(data)
    assert [(v.bag_id, v.rule) for v in check.violations] == [("b", "dimension mismatch")]


def test_duplicate_ids_and_nan_are_reported():
    data = MILDataset([Bag("a", [[0, np.nan]], Label.POSITIVE),
                       Bag("a", [[1, 2]], Label.NEGATIVE)], dim=2)
    rules = {v.rule for v in validate_dataset(data).violations}
    assert rules == {"non-finite instance value", "duplicate bag id"}


def test_summary_single_bag():
    data = MILDataset([Bag("a", np.ones((3, 2)), Label.POSITIVE)])
    assert dataset_summary(data).as_tuple() == (1, 0, 2, 3, 3, 3, 3)


def test_summary_empty_dataset():
    assert dataset_summary(MILDataset([], dim=0)).as_tuple() == (0, 0, 0, 0, 0, 0, 0)


@given(st.lists(st.integers(1, 9), min_size=1, max_size=12))
def test_summary_totals_match_bag_sizes(sizes):
    bags = [Bag(f"b{k}", np.zeros((s, 2)), Label.POSITIVE if k % 2 else Label.NEGATIVE)
            for k, s in enumerate(sizes)]
    s = dataset_summary(MILDataset(bags))
    assert s.instances == sum(sizes)
    assert (s.min_size, s.max_size) == (min(sizes), max(sizes))
    assert s.positive_bags + s.negative_bags == len(sizes)


def test_validate_is_idempotent_and_pure():
    bags = [Bag("a", np.zeros((0, 2)), Label.POSITIVE), Bag("b", [[1.0, 2.0]], Label.NEGATIVE)]
    data = MILDataset(bags, dim=2)
    before = [b.instances.copy() for b in data]
    assert validate_dataset(data) == validate_dataset(data)
    assert all(np.array_equal(x, b.instances) for x, b in zip(before, data))


def test_bags_are_immutable():
    bag = Bag("a", [[1.0, 2.0]], Label.POSITIVE)
    with pytest.raises(ValueError):
        bag.instances[0, 0] = 5.0


def test_unlabeled_and_require_labels():
    data = MILDataset([Bag("a", [[0.0]], Label.POSITIVE), Bag("b", [[1.0]], Label.NEGATIVE)])
    assert list(require_labels(data)) == [1, -1]
    hidden = data.unlabeled()
    assert all(lab is Label.UNKNOWN for lab in hidden.labels)
    with pytest.raises(ValueError, match="unknown label"):
        require_labels(hidden)
