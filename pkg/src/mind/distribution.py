"""Bag dissimilarities that treat a bag as a sample from a distribution."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .data import Bag
from .pointset import _as_points, pairwise_sq_euclidean
from .transport import TransportPlan, solve_transport

log = logging.getLogger(__name__)

EMD_MAX_INSTANCES = 512
RIDGE_CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class GaussianSummary:
    mean: np.ndarray
    covariance: np.ndarray

    @classmethod
    def fit(cls, points) -> "GaussianSummary":
        """Maximum-likelihood mean and covariance (divides by n)."""
        x = _as_points(points)
        mu = x.mean(axis=0)
        centered = x - mu
        return cls(mu, centered.T @ centered / x.shape[0])


@dataclass(frozen=True)
class CSParams:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    @classmethod
    def default(cls, dim: int) -> "CSParams":
        return cls(math.sqrt(dim))


def _condition(matrix: np.ndarray) -> float:
    s = np.linalg.svd(matrix, compute_uv=False)
    return math.inf if s[-1] <= 0 else float(s[0] / s[-1])


def _bag_name(bag) -> str:
    return repr(bag.id) if isinstance(bag, Bag) else "<array>"


def mahalanobis_dissim(bag_i, bag_j, ridge: float | None = None) -> float:
    """Mahalanobis distance between bag means under the pooled covariance.

    ``ridge`` is added to the diagonal of ``(S_i + S_j) / 2``. With
    ``ridge=None`` nothing is added unless the pooled matrix has condition
    number above 1e12, in which case ``1e-6 * trace / d`` is used.
    """
    gi, gj = GaussianSummary.fit(bag_i), GaussianSummary.fit(bag_j)
    if gi.mean.shape != gj.mean.shape:
        raise ValueError("dimension mismatch")
    d = gi.mean.size
    pooled = 0.5 * gi.covariance + 0.5 * gj.covariance
    if ridge is None:
        ridge = 0.0
        if _condition(pooled) > RIDGE_CONDITION_LIMIT:
            scale = np.trace(pooled) / d
            ridge = 1e-6 * scale if scale > 0 else 1e-6
            if min(_as_points(bag_i).shape[0], _as_points(bag_j).shape[0]) == 1:
                log.info(
                    "single-instance bag in pair (%s, %s): Mahalanobis reduces "
                    "to scaled squared Euclidean", _bag_name(bag_i), _bag_name(bag_j)
                )
    elif ridge < 0:
        raise ValueError("ridge must be non-negative")
    diff = gi.mean - gj.mean
    if not diff.any():
        return 0.0
    pooled = pooled + ridge * np.eye(d)
    if _condition(pooled) > 1 / np.finfo(float).eps:
        raise np.linalg.LinAlgError(
            f"pooled covariance of bags {_bag_name(bag_i)} and {_bag_name(bag_j)} "
            f"is singular (ridge={ridge!r})"
        )
    return float(max(diff @ np.linalg.solve(pooled, diff), 0.0))


def cs_divergence(bag_i, bag_j, params: CSParams | float | None = None) -> float:
    """Cauchy-Schwarz divergence between Parzen estimates of two bags.

    Kernel values are summed, not averaged, over instance pairs. The Gaussian
    normaliser is shared by all three kernel sums and cancels in the ratio,
    so it is left out.
    """
    a, b = _as_points(bag_i), _as_points(bag_j)
    if a.shape[1] != b.shape[1]:
        raise ValueError("dimension mismatch")
    if params is None:
        params = CSParams.default(a.shape[1])
    elif not isinstance(params, CSParams):
        params = CSParams(float(params))
    width = 2.0 * params.sigma
    scale = -1.0 / (2.0 * width * width)

    def kernel_sum(x, y):
        return math.fsum(np.exp(scale * pairwise_sq_euclidean(x, y)).ravel())

    cross = kernel_sum(a, b)
    if cross == 0.0:
        raise FloatingPointError("kernel underflow; increase sigma")
    value = -math.log(cross / math.sqrt(kernel_sum(a, a) * kernel_sum(b, b)))
    return value


def emd(bag_i, bag_j, max_instances: int = EMD_MAX_INSTANCES) -> tuple[float, TransportPlan]:
    """Earth mover's distance with uniform instance weights.

    Ground distance is plain (not squared) Euclidean. Masses are scaled to
    integers (``n_j`` units per source, ``n_i`` per sink) so the simplex
    pivots are exact, and the result is rescaled to unit total mass.
    """
    a, b = _as_points(bag_i), _as_points(bag_j)
    ni, nj = a.shape[0], b.shape[0]
    if ni == 0 or nj == 0:
        raise ValueError("empty bag")
    if max(ni, nj) > max_instances:
        raise ValueError(
            f"bag with {max(ni, nj)} instances exceeds EMD limit of {max_instances}"
        )
    ground = np.sqrt(pairwise_sq_euclidean(a, b))
    cost, plan = solve_transport(np.full(ni, float(nj)), np.full(nj, float(ni)), ground)
    total = float(ni * nj)
    plan = TransportPlan(tuple((i, j, f / total) for i, j, f in plan.flows), plan.shape)
    return cost / total, plan
