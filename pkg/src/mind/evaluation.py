"""AUC, repeated stratified cross-validation and learning curves over the full pipeline."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .altreps import MilesParams, miles_rep, minimax_rep, training_instances
from .classifiers import LinearModel, TrainConfig, predict_scores
from .classifiers import train as train_model
from .data import Label, MILDataset, require_labels, validate_dataset
from .pointset import symmetrize
from .space import (
    DissimMatrix,
    FeatureTable,
    Measure,
    as_measure,
    build_representation,
    compute_matrix,
    select_prototypes,
)


class FoldError(ValueError):
    pass


def _signs(labels) -> np.ndarray:
    out = []
    for lab in labels:
        if isinstance(lab, Label):
            out.append(lab.sign)
        elif isinstance(lab, (bool, np.bool_)):
            out.append(1 if lab else -1)
        else:
            out.append(int(np.sign(lab)))
    return np.array(out, dtype=np.int64)


def auc(scores, labels) -> float:
    """Area under the ROC curve, ties between a positive and a negative count 1/2.

    ``labels`` may be :class:`Label` values, booleans or +1/-1.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = _signs(labels)
    if s.size != y.size:
        raise ValueError("scores and labels differ in length")
    if np.any(y == 0):
        raise ValueError("AUC needs known labels")
    n_pos, n_neg = int(np.sum(y > 0)), int(np.sum(y < 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    ranks = rankdata(s)
    return float((ranks[y > 0].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


@dataclass(frozen=True)
class PipelineConfig:
    """How a fold turns bags into scores.

    With ``representation="to"`` the matrix is symmetrized per
    ``symmetrization``; ``"from"`` and ``"extended"`` use the two directed
    matrices as they are. ``baseline`` replaces the dissimilarity space by
    the Minimax or MILES representation.
    """

    measure: Measure = field(default_factory=lambda: Measure("meanmin"))
    symmetrization: str = "average"
    representation: str = "to"
    classifier: str = "svm"
    train: TrainConfig = field(default_factory=TrainConfig)
    baseline: str | None = None
    miles_sigma: float = 10.0
    prototypes: str = "all"
    n_prototypes: int | None = None
    prototype_seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "measure", as_measure(self.measure))
        if self.symmetrization == "avg":
            object.__setattr__(self, "symmetrization", "average")
        if self.baseline not in (None, "minimax", "miles"):
            raise ValueError(f"unknown baseline {self.baseline!r}")
        if self.classifier not in ("svm", "logistic"):
            raise ValueError(f"unknown classifier {self.classifier!r}")

    def as_dict(self) -> dict:
        return {
            "measure": self.measure.config(),
            "symmetrization": self.symmetrization,
            "representation": self.representation,
            "classifier": self.classifier,
            "train": self.train.as_dict(),
            "baseline": self.baseline,
            "miles_sigma": self.miles_sigma,
            "prototypes": self.prototypes,
            "n_prototypes": self.n_prototypes,
            "prototype_seed": self.prototype_seed,
        }


class PairwiseCache:
    """Directed dissimilarities between all bags of a dataset.

    Every entry is computed independently of the others, so slicing this
    matrix gives bitwise the same values as computing a fold's matrix from
    scratch. No labels are read.
    """

    def __init__(self, dataset: MILDataset, measure: Measure, threads: int | None = None):
        full = compute_matrix(dataset, dataset.bags, measure, "none", "to", threads)
        self.values = full.values
        self.index = {bag_id: k for k, bag_id in enumerate(full.rows)}
        self.measure = measure

    def matrix(self, rows, cols, symmetrization="none", direction="to") -> DissimMatrix:
        r = np.array([self.index[b.id] for b in rows], dtype=int)
        c = np.array([self.index[b.id] for b in cols], dtype=int)
        to = self.values[np.ix_(r, c)]
        back = self.values[np.ix_(c, r)].T
        if symmetrization != "none":
            vals, tag = symmetrize(to, back, symmetrization), "sym"
        else:
            vals, tag = (to, "to") if direction == "to" else (back, "from")
        return DissimMatrix([b.id for b in rows], [b.id for b in cols], vals,
                            self.measure.name, symmetrization, tag)


@dataclass
class FoldResult:
    model: LinearModel
    scores: np.ndarray
    test_ids: tuple[str, ...]
    matrices: tuple[DissimMatrix, ...]
    train_table: FeatureTable
    test_table: FeatureTable
    timing: dict


def _representation(train: MILDataset, test: MILDataset, pipeline: PipelineConfig,
                    cache: PairwiseCache | None):
    both = MILDataset(list(train.bags) + list(test.bags), train.dim)
    if pipeline.baseline == "minimax":
        return minimax_rep(both), ()
    if pipeline.baseline == "miles":
        inst, names = training_instances(train)
        return miles_rep(both, inst, MilesParams(pipeline.miles_sigma), names), ()

    protos = select_prototypes(train, pipeline.prototypes, pipeline.n_prototypes,
                               pipeline.prototype_seed)

    def matrix(sym, direction):
        if cache is not None:
            return cache.matrix(both.bags, protos.bags, sym, direction)
        return compute_matrix(both, protos, pipeline.measure, sym, direction, pipeline.threads)

    mode = pipeline.representation
    if mode == "to":
        mats = (matrix(pipeline.symmetrization, "to"),)
        table = build_representation(mats[0], None, "to", both.labels)
    else:
        mats = (matrix("none", "to"), matrix("none", "from"))
        table = build_representation(mats[0], mats[1], mode, both.labels)
    return table, mats


def fit_fold(train: MILDataset, test: MILDataset, pipeline: PipelineConfig,
             cache: PairwiseCache | None = None) -> FoldResult:
    """Fit on ``train`` and score ``test``.

    Test labels are discarded on entry, so nothing computed here can
    depend on them.
    """
    test = test.unlabeled()
    t0 = time.perf_counter()
    table, mats = _representation(train, test, pipeline, cache)
    n_tr = len(train)
    train_table = table.take(range(n_tr))
    test_table = table.take(range(n_tr, len(table.ids)))
    t1 = time.perf_counter()
    model = train_model(train_table, pipeline.classifier, pipeline.train)
    t2 = time.perf_counter()
    scores = predict_scores(model, test_table)
    t3 = time.perf_counter()
    return FoldResult(model, scores, tuple(test.ids), mats, train_table, test_table,
                      {"matrix": t1 - t0, "train": t2 - t1, "test": t3 - t2})


@dataclass(frozen=True)
class CVConfig:
    folds: int = 10
    repeats: int = 5
    seed: int = 0
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")

    def as_dict(self) -> dict:
        return {"folds": self.folds, "repeats": self.repeats, "seed": self.seed,
                "pipeline": self.pipeline.as_dict()}


@dataclass
class EvalReport:
    fold_aucs: list[float]
    fold_index: list[tuple[int, int]]
    mean_auc: float
    standard_error: float
    timing: dict
    config: dict
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_folds(cls, aucs, index, timing, config, extra=None) -> "EvalReport":
        aucs = [float(a) for a in aucs]
        mean = math.fsum(aucs) / len(aucs) if aucs else float("nan")
        se = float(np.std(aucs, ddof=1) / math.sqrt(len(aucs))) if len(aucs) > 1 else 0.0
        return cls(aucs, [tuple(i) for i in index], mean, se, timing, config, extra or {})

    def as_dict(self) -> dict:
        return {
            "fold_aucs": self.fold_aucs,
            "fold_index": [list(i) for i in self.fold_index],
            "mean_auc": self.mean_auc,
            "standard_error": self.standard_error,
            "standard_error_formula": "sample std (ddof=1) of fold AUCs / sqrt(number of folds)",
            "timing": self.timing,
            "config": self.config,
            **({"extra": self.extra} if self.extra else {}),
        }


def stratified_folds(labels: np.ndarray, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold number per bag; each class is shuffled and dealt round-robin."""
    assign = np.empty(labels.size, dtype=int)
    offset = 0
    for cls in (1, -1):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(idx.size)]
        assign[idx] = (offset + np.arange(idx.size)) % folds
        offset += idx.size
    return assign


def _check_dataset(dataset: MILDataset) -> np.ndarray:
    check = validate_dataset(dataset)
    if not check.ok:
        raise ValueError("invalid dataset: " + "; ".join(map(str, check.violations)))
    return require_labels(dataset)


def _sum_timing(total: dict, part: dict):
    for k, v in part.items():
        total[k] = total.get(k, 0.0) + v


def cross_validate(dataset: MILDataset, config: CVConfig) -> EvalReport:
    """Repeated stratified k-fold CV; prototypes and scaling are refit per fold."""
    y = _check_dataset(dataset)
    t0 = time.perf_counter()
    pipeline = config.pipeline
    cache = None
    if pipeline.baseline is None:
        cache = PairwiseCache(dataset, pipeline.measure, pipeline.threads)
    timing = {"matrix": time.perf_counter() - t0, "train": 0.0, "test": 0.0}

    streams = np.random.SeedSequence(config.seed).spawn(config.repeats)
    aucs, index = [], []
    for r, stream in enumerate(streams):
        assign = stratified_folds(y, config.folds, np.random.default_rng(stream))
        for f in range(config.folds):
            test_idx = np.flatnonzero(assign == f)
            train_idx = np.flatnonzero(assign != f)
            for part, name in ((test_idx, "test"), (train_idx, "training")):
                if not (np.any(y[part] > 0) and np.any(y[part] < 0)):
                    raise FoldError(f"fold without both classes (repeat {r}, fold {f}, "
                                    f"{name} part); use fewer folds")
            res = fit_fold(dataset.subset(train_idx), dataset.subset(test_idx), pipeline, cache)
            _sum_timing(timing, res.timing)
            aucs.append(auc(res.scores, y[test_idx]))
            index.append((r, f))
    return EvalReport.from_folds(aucs, index, timing, config.as_dict())


def learning_curve(dataset: MILDataset, sizes: Sequence[int], iterations: int = 20,
                   pipeline: PipelineConfig | None = None, seed: int = 0,
                   test_fraction: float = 0.2) -> list[EvalReport]:
    """AUC against training bags per class.

    Each iteration makes one stratified train/test split; every size is
    then trained on a per-class subsample of that iteration's training
    part (capped at what is available) and tested on the same test part.
    """
    pipeline = pipeline or PipelineConfig()
    y = _check_dataset(dataset)
    cache = PairwiseCache(dataset, pipeline.measure, pipeline.threads) \
        if pipeline.baseline is None else None
    streams = np.random.SeedSequence(seed).spawn(iterations)
    per_size = {s: {"aucs": [], "index": [], "timing": {}, "caps": [], "tests": []} for s in sizes}
    for it, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        test_parts, train_parts = [], {}
        for cls in (1, -1):
            idx = np.flatnonzero(y == cls)
            idx = idx[rng.permutation(idx.size)]
            n_test = min(max(1, int(round(test_fraction * idx.size))), idx.size - 1)
            if n_test < 1:
                raise FoldError("fold without both classes: a class has fewer than 2 bags")
            test_parts.append(idx[:n_test])
            train_parts[cls] = idx[n_test:]
        test_idx = np.sort(np.concatenate(test_parts))
        for s in sizes:
            chosen = [train_parts[cls][:min(s, train_parts[cls].size)] for cls in (1, -1)]
            train_idx = np.sort(np.concatenate(chosen))
            res = fit_fold(dataset.subset(train_idx), dataset.subset(test_idx), pipeline, cache)
            rec = per_size[s]
            rec["aucs"].append(auc(res.scores, y[test_idx]))
            rec["index"].append((it, 0))
            rec["caps"].append([int(c.size) for c in chosen])
            rec["tests"].append([dataset[i].id for i in test_idx])
            _sum_timing(rec["timing"], res.timing)
    reports = []
    for s in sizes:
        rec = per_size[s]
        capped = any(min(c) < s for c in rec["caps"])
        config = {"bags_per_class": s, "iterations": iterations, "seed": seed,
                  "test_fraction": test_fraction, "pipeline": pipeline.as_dict()}
        extra = {"capped": capped, "train_per_class": rec["caps"], "test_ids": rec["tests"]}
        reports.append(EvalReport.from_folds(rec["aucs"], rec["index"], rec["timing"], config, extra))
    return reports
