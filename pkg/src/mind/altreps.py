"""Minimax and MILES-style bag representations used as baselines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import MILDataset
from .pointset import pairwise_sq_euclidean
from .space import FeatureTable


@dataclass(frozen=True)
class MilesParams:
    sigma: float = 10.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def minimax_rep(bags: MILDataset) -> FeatureTable:
    """Per-feature minima followed by per-feature maxima over each bag's instances."""
    d = bags.dim
    rows = [np.concatenate([b.instances.min(axis=0), b.instances.max(axis=0)]) for b in bags]
    values = np.vstack(rows) if rows else np.zeros((0, 2 * d))
    columns = [f"min:f{k}" for k in range(d)] + [f"max:f{k}" for k in range(d)]
    return FeatureTable(bags.ids, bags.labels, columns, values, {"mode": "minimax"})


def miles_rep(bags: MILDataset, training_instances, params: MilesParams | None = None,
              instance_names=None) -> FeatureTable:
    """Similarity of each bag to each training instance.

    Feature ``j`` is ``max_k exp(-||x_k - t_j||^2 / sigma^2)`` over the
    bag's instances ``x_k``.
    """
    params = params or MilesParams()
    t = np.atleast_2d(np.asarray(training_instances, dtype=np.float64))
    if instance_names is None:
        instance_names = [f"inst{j}" for j in range(t.shape[0])]
    # nearest instance gives the max similarity; exp is monotone
    rows = [pairwise_sq_euclidean(b.instances, t).min(axis=0) for b in bags]
    nearest = np.vstack(rows) if rows else np.zeros((0, t.shape[0]))
    values = np.exp(-nearest / params.sigma ** 2)
    return FeatureTable(bags.ids, bags.labels, [f"miles:{n}" for n in instance_names],
                        values, {"mode": "miles", "sigma": params.sigma})


def training_instances(training: MILDataset):
    """Instances of the training bags in dataset order, with stable names."""
    names = [f"{b.id}#{k}" for b in training for k in range(b.size)]
    return training.instances(), names
