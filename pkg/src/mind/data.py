"""Bags, datasets and labels."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class Label(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    UNKNOWN = "unknown"

    @property
    def sign(self) -> int:
        return {Label.POSITIVE: 1, Label.NEGATIVE: -1, Label.UNKNOWN: 0}[self]


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Bag:
    """A labelled set of instance vectors.

    ``instances`` is stored as a read-only ``(n, d)`` float array, one row per
    instance. Construction does not validate; see :func:`validate_dataset`.
    """

    id: str
    instances: np.ndarray
    label: Label = Label.UNKNOWN

    def __post_init__(self):
        object.__setattr__(self, "instances", _frozen_array(self.instances))
        object.__setattr__(self, "label", Label(self.label))

    @property
    def size(self) -> int:
        return self.instances.shape[0]

    @property
    def dim(self) -> int:
        return self.instances.shape[1] if self.instances.ndim == 2 else 0

    def with_label(self, label: Label) -> "Bag":
        return Bag(self.id, self.instances, label)

    def __eq__(self, other):
        if not isinstance(other, Bag):
            return NotImplemented
        return (
            self.id == other.id
            and self.label == other.label
            and self.instances.shape == other.instances.shape
            and np.array_equal(self.instances, other.instances)
        )

    __hash__ = None


@dataclass(frozen=True)
class MILDataset:
    bags: tuple[Bag, ...]
    dim: int

    def __init__(self, bags: Iterable[Bag], dim: int | None = None):
        bags = tuple(bags)
        if dim is None:
            dim = bags[0].dim if bags else 0
        object.__setattr__(self, "bags", bags)
        object.__setattr__(self, "dim", int(dim))

    def __len__(self):
        return len(self.bags)

    def __iter__(self):
        return iter(self.bags)

    def __getitem__(self, i):
        return self.bags[i]

    @property
    def ids(self) -> list[str]:
        return [b.id for b in self.bags]

    @property
    def labels(self) -> list[Label]:
        return [b.label for b in self.bags]

    def subset(self, indices: Sequence[int]) -> "MILDataset":
        return MILDataset([self.bags[i] for i in indices], self.dim)

    def unlabeled(self) -> "MILDataset":
        """Copy with every label replaced by ``Label.UNKNOWN``."""
        return MILDataset([b.with_label(Label.UNKNOWN) for b in self.bags], self.dim)

    def instances(self) -> np.ndarray:
        if not self.bags:
            return np.zeros((0, self.dim))
        return np.vstack([b.instances for b in self.bags])


@dataclass(frozen=True)
class Violation:
    bag_id: str
    rule: str

    def __str__(self):
        return f"{self.bag_id}: {self.rule}"


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_dataset(dataset: MILDataset) -> ValidationResult:
    """Check the dataset invariants and report every violation found."""
    found = []
    if dataset.dim < 1 and len(dataset):
        found.append(Violation("<dataset>", "non-positive dimensionality"))
    seen = set()
    for bag in dataset.bags:
        if bag.id in seen:
            found.append(Violation(bag.id, "duplicate bag id"))
        seen.add(bag.id)
        if bag.size == 0:
            found.append(Violation(bag.id, "empty bag"))
            continue
        if bag.dim != dataset.dim:
            found.append(Violation(bag.id, "dimension mismatch"))
        if not np.all(np.isfinite(bag.instances)):
            found.append(Violation(bag.id, "non-finite instance value"))
    return ValidationResult(tuple(found))


@dataclass(frozen=True)
class DatasetSummary:
    positive_bags: int
    negative_bags: int
    dim: int
    instances: int
    min_size: int
    avg_size: float
    max_size: int

    def as_tuple(self):
        return (
            self.positive_bags,
            self.negative_bags,
            self.dim,
            self.instances,
            self.min_size,
            self.avg_size,
            self.max_size,
        )


def dataset_summary(dataset: MILDataset) -> DatasetSummary:
    sizes = [b.size for b in dataset.bags]
    if not sizes:
        return DatasetSummary(0, 0, 0, 0, 0, 0.0, 0)
    return DatasetSummary(
        positive_bags=sum(b.label is Label.POSITIVE for b in dataset.bags),
        negative_bags=sum(b.label is Label.NEGATIVE for b in dataset.bags),
        dim=dataset.dim,
        instances=sum(sizes),
        min_size=min(sizes),
        avg_size=sum(sizes) / len(sizes),
        max_size=max(sizes),
    )


def require_labels(dataset: MILDataset) -> np.ndarray:
    """Return labels as a +1/-1 array, rejecting unknown labels."""
    signs = np.array([b.label.sign for b in dataset.bags], dtype=np.int64)
    if np.any(signs == 0):
        bad = next(b.id for b in dataset.bags if b.label is Label.UNKNOWN)
        raise ValueError(f"bag {bad!r} has an unknown label")
    return signs
