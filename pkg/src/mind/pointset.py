"""Point-set bag dissimilarities built on squared Euclidean instance distances."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .data import Bag

POINTSET_MEASURES = ("minmin", "meanmin", "maxmin", "hausdorff", "meanmean")
DIRECTED_MEASURES = frozenset({"meanmin", "maxmin"})
SYMMETRIZATION_MODES = ("none", "average", "min", "max")


def _as_points(x) -> np.ndarray:
    if isinstance(x, Bag):
        return x.instances
    return np.atleast_2d(np.asarray(x, dtype=np.float64))


def sq_euclidean(x, y) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.size} vs {y.size}")
    return float(pairwise_sq_euclidean(x[None, :], y[None, :])[0, 0])


def pairwise_sq_euclidean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """All squared distances between rows of ``a`` and rows of ``b``.

    Coordinates are accumulated one at a time, in feature order, so every
    entry is bitwise reproducible regardless of the shapes of ``a`` and ``b``.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    out = np.zeros((a.shape[0], b.shape[0]))
    for k in range(a.shape[1]):
        diff = a[:, k, None] - b[None, :, k]
        out += diff * diff
    return out


def exact_mean(values) -> float:
    """Correctly rounded mean of floats, independent of their order.

    The exact sum is recovered as a short expansion of non-overlapping
    ``fsum`` terms and divided as a fraction, so only one rounding occurs.
    """
    vals = list(map(float, np.ravel(values)))
    if not vals:
        raise ValueError("mean of no values")
    terms = []
    while True:
        part = math.fsum(vals + [-t for t in terms])
        if part == 0.0 or not math.isfinite(part):
            break
        terms.append(part)
    if terms and not math.isfinite(terms[-1]):
        return terms[-1] / len(vals)
    return float(sum(map(Fraction, terms), Fraction(0)) / len(vals))


def reduce_block(block: np.ndarray, kind: str) -> float:
    """Bag dissimilarity from a block of instance distances.

    Rows of ``block`` index the instances of the first bag, columns the
    instances of the second. Means are correctly rounded, so the value
    does not depend on summation order.
    """
    if block.size == 0:
        raise ValueError("empty bag")
    if kind == "minmin":
        return float(block.min())
    if kind == "meanmin":
        return exact_mean(block.min(axis=1))
    if kind == "maxmin":
        return float(block.min(axis=1).max())
    if kind == "hausdorff":
        return float(max(block.min(axis=1).max(), block.min(axis=0).max()))
    if kind == "meanmean":
        return exact_mean(block)
    raise ValueError(f"unknown point-set measure {kind!r}")


def pointset_dissim(bag_i, bag_j, measure: str) -> float:
    """Dissimilarity of ``bag_i`` to ``bag_j`` under a point-set measure.

    ``meanmin`` and ``maxmin`` are directed: they summarise, for each
    instance of ``bag_i``, the distance to its nearest instance in ``bag_j``.
    """
    a, b = _as_points(bag_i), _as_points(bag_j)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("empty bag")
    return reduce_block(pairwise_sq_euclidean(a, b), measure)


def symmetrize(value_ij, value_ji, mode: str = "average"):
    """Combine the two directed values; works elementwise on arrays too."""
    if mode == "none":
        return value_ij
    if mode in ("average", "avg"):
        return (value_ij + value_ji) / 2
    if mode == "min":
        return np.minimum(value_ij, value_ji) if isinstance(value_ij, np.ndarray) else min(value_ij, value_ji)
    if mode == "max":
        return np.maximum(value_ij, value_ji) if isinstance(value_ij, np.ndarray) else max(value_ij, value_ji)
    raise ValueError(f"unknown symmetrization mode {mode!r}")
