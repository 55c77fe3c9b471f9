"""Dissimilarity-space construction: prototypes, bag-by-prototype matrices, feature tables."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import Bag, Label, MILDataset
from .distribution import EMD_MAX_INSTANCES, CSParams, cs_divergence, emd, mahalanobis_dissim
from .pointset import (
    DIRECTED_MEASURES,
    POINTSET_MEASURES,
    SYMMETRIZATION_MODES,
    pairwise_sq_euclidean,
    reduce_block,
    symmetrize,
)

DISTRIBUTION_MEASURES = ("mahalanobis", "cs", "emd")
MEASURES = POINTSET_MEASURES + DISTRIBUTION_MEASURES


class MatrixEntryError(ValueError):
    def __init__(self, bag_id, prototype_id, cause):
        super().__init__(f"bag {bag_id!r} vs prototype {prototype_id!r}: {cause}")
        self.bag_id = bag_id
        self.prototype_id = prototype_id


@dataclass(frozen=True)
class Measure:
    """A bag dissimilarity and its parameters.

    ``sigma`` applies to ``cs`` (default ``sqrt(dim)``), ``ridge`` to
    ``mahalanobis`` (default: automatic), ``max_instances`` to ``emd``.
    """

    name: str
    sigma: float | None = None
    ridge: float | None = None
    max_instances: int = EMD_MAX_INSTANCES

    def __post_init__(self):
        if self.name not in MEASURES:
            raise ValueError(f"unknown measure {self.name!r}; choose from {', '.join(MEASURES)}")

    @property
    def directed(self) -> bool:
        return self.name in DIRECTED_MEASURES

    def pair(self, bag_i, bag_j) -> float:
        if self.name in POINTSET_MEASURES:
            return reduce_block(pairwise_sq_euclidean(_pts(bag_i), _pts(bag_j)), self.name)
        if self.name == "mahalanobis":
            return mahalanobis_dissim(bag_i, bag_j, self.ridge)
        if self.name == "cs":
            sigma = self.sigma if self.sigma is not None else np.sqrt(_pts(bag_i).shape[1])
            return cs_divergence(bag_i, bag_j, CSParams(float(sigma)))
        return emd(bag_i, bag_j, self.max_instances)[0]

    def config(self) -> dict:
        out = {"name": self.name}
        if self.name == "cs":
            out["sigma"] = self.sigma
        elif self.name == "mahalanobis":
            out["ridge"] = self.ridge
        elif self.name == "emd":
            out["max_instances"] = self.max_instances
        return out


def _pts(bag):
    return bag.instances if isinstance(bag, Bag) else np.atleast_2d(bag)


def as_measure(measure) -> Measure:
    return measure if isinstance(measure, Measure) else Measure(str(measure))


@dataclass(frozen=True)
class PrototypeSet:
    bags: tuple[Bag, ...]
    strategy: str = "all"
    seed: int | None = None

    @property
    def ids(self) -> list[str]:
        return [b.id for b in self.bags]

    def __len__(self):
        return len(self.bags)


def select_prototypes(training: MILDataset, strategy: str = "all", M: int | None = None,
                      seed: int = 0) -> PrototypeSet:
    """Pick the prototype bags spanning the dissimilarity space.

    ``"all"`` uses every training bag in dataset order and ignores ``M``.
    ``"random"`` draws ``M`` distinct bags with a seeded generator and keeps
    them in dataset order.
    """
    if strategy == "all":
        return PrototypeSet(tuple(training.bags), "all", None)
    if strategy != "random":
        raise ValueError(f"unknown prototype strategy {strategy!r}")
    n = len(training)
    if M is None or M < 1:
        raise ValueError("random selection needs M >= 1")
    if M > n:
        raise ValueError(f"cannot select {M} prototypes from {n} training bags")
    picked = np.sort(np.random.default_rng(seed).choice(n, size=M, replace=False))
    return PrototypeSet(tuple(training.bags[i] for i in picked), "random", seed)


@dataclass(frozen=True)
class DissimMatrix:
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    values: np.ndarray
    measure: str = ""
    symmetrization: str = "none"
    direction: str = "to"

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(self, "cols", tuple(self.cols))
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (len(self.rows), len(self.cols)):
            raise ValueError(f"values shape {values.shape} does not match ids "
                             f"({len(self.rows)}, {len(self.cols)})")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape

    def take(self, rows: Sequence[int], cols: Sequence[int]) -> "DissimMatrix":
        rows, cols = np.asarray(rows, dtype=int), np.asarray(cols, dtype=int)
        return DissimMatrix(
            [self.rows[i] for i in rows],
            [self.cols[j] for j in cols],
            self.values[np.ix_(rows, cols)],
            self.measure,
            self.symmetrization,
            self.direction,
        )

    def transposed(self) -> "DissimMatrix":
        flipped = {"to": "from", "from": "to"}.get(self.direction, self.direction)
        return DissimMatrix(self.cols, self.rows, self.values.T, self.measure,
                            self.symmetrization, flipped)


def default_threads() -> int:
    return max(1, int(os.environ.get("MIND_THREADS", "1")))


def _row_values(bag: Bag, protos: Sequence[Bag], measure: Measure, symmetrization: str,
                direction: str) -> np.ndarray:
    out = np.empty(len(protos))
    need_to = direction == "to" or symmetrization != "none"
    need_from = direction == "from" or symmetrization != "none"
    if measure.name in POINTSET_MEASURES:
        block = pairwise_sq_euclidean(bag.instances, np.vstack([p.instances for p in protos]))
        start = 0
    for j, proto in enumerate(protos):
        try:
            if measure.name in POINTSET_MEASURES:
                sub = block[:, start:start + proto.size]
                start += proto.size
                to = reduce_block(sub, measure.name) if need_to else None
                back = reduce_block(sub.T, measure.name) if need_from else None
            else:
                to = measure.pair(bag, proto) if need_to else None
                back = measure.pair(proto, bag) if need_from else None
        except (ValueError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
            raise MatrixEntryError(bag.id, proto.id, exc) from exc
        if symmetrization == "none":
            out[j] = to if direction == "to" else back
        else:
            out[j] = symmetrize(to, back, symmetrization)
    return out


def compute_matrix(bags: MILDataset | Sequence[Bag], prototypes: PrototypeSet | Sequence[Bag],
                   measure, symmetrization: str = "none", direction: str = "to",
                   threads: int | None = None) -> DissimMatrix:
    """Dissimilarities of every bag to every prototype.

    Entry ``(i, j)`` is ``d(B_i, P_j)`` for ``direction="to"`` and
    ``d(P_j, B_i)`` for ``"from"``. Any symmetrization other than ``"none"``
    combines both directions and makes ``direction`` irrelevant.

    Rows are computed independently, optionally on ``threads`` workers;
    the result does not depend on the worker count.
    """
    measure = as_measure(measure)
    if symmetrization == "avg":
        symmetrization = "average"
    if symmetrization not in SYMMETRIZATION_MODES:
        raise ValueError(f"unknown symmetrization {symmetrization!r}")
    if direction not in ("to", "from"):
        raise ValueError(f"unknown direction {direction!r}")
    row_bags = list(bags)
    protos = list(prototypes.bags if isinstance(prototypes, PrototypeSet) else prototypes)
    if not protos:
        raise ValueError("no prototypes")
    dims = {b.dim for b in row_bags} | {p.dim for p in protos}
    if len(dims) > 1:
        raise ValueError(f"bags and prototypes disagree on dimensionality: {sorted(dims)}")

    threads = default_threads() if threads is None else max(1, int(threads))
    work = lambda bag: _row_values(bag, protos, measure, symmetrization, direction)  # noqa: E731
    if threads > 1 and len(row_bags) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, row_bags))
    else:
        rows = [work(b) for b in row_bags]
    values = np.vstack(rows) if rows else np.zeros((0, len(protos)))
    return DissimMatrix(
        [b.id for b in row_bags],
        [p.id for p in protos],
        values,
        measure.name,
        symmetrization,
        direction if symmetrization == "none" else "sym",
    )


@dataclass(frozen=True)
class FeatureTable:
    """Bags as rows of a numeric table, ready for a classifier."""

    ids: tuple[str, ...]
    labels: tuple[Label, ...]
    columns: tuple[str, ...]
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "labels", tuple(Label(x) for x in self.labels))
        object.__setattr__(self, "columns", tuple(self.columns))
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape != (len(self.ids), len(self.columns)):
            raise ValueError(f"values shape {values.shape} does not match "
                             f"({len(self.ids)}, {len(self.columns)})")
        if len(self.labels) != len(self.ids):
            raise ValueError("one label per row required")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature table has missing or non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape

    def take(self, rows: Sequence[int]) -> "FeatureTable":
        rows = np.asarray(rows, dtype=int)
        return FeatureTable([self.ids[i] for i in rows], [self.labels[i] for i in rows],
                            self.columns, self.values[rows], dict(self.meta))

    def signs(self) -> np.ndarray:
        return np.array([lab.sign for lab in self.labels], dtype=np.int64)


def build_representation(D_to: DissimMatrix | None, D_from: DissimMatrix | None = None,
                         mode: str = "to", labels: Sequence[Label] | None = None) -> FeatureTable:
    """Feature table from one or both directed matrices.

    ``extended`` concatenates the to- and from-columns (2M features).
    """
    if mode not in ("to", "from", "extended"):
        raise ValueError(f"unknown representation mode {mode!r}")
    if mode in ("from", "extended") and D_from is None:
        raise ValueError(f"{mode} mode needs the from-direction matrix")
    if mode in ("to", "extended") and D_to is None:
        raise ValueError(f"{mode} mode needs the to-direction matrix")
    if mode == "extended" and (D_to.rows != D_from.rows or D_to.cols != D_from.cols):
        raise ValueError("to and from matrices have different row/column ids")

    parts, names = [], []
    for tag, mat in (("to", D_to), ("from", D_from)):
        if mode in (tag, "extended"):
            parts.append(mat.values)
            names += [f"{mat.measure}:{pid}:{tag}" for pid in mat.cols]
    ref = D_to if D_to is not None else D_from
    if labels is None:
        labels = [Label.UNKNOWN] * len(ref.rows)
    return FeatureTable(ref.rows, labels, names, np.hstack(parts),
                        {"mode": mode, "measure": ref.measure,
                         "symmetrization": ref.symmetrization})
