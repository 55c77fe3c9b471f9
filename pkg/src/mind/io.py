"""Text formats for datasets, dissimilarity matrices, feature tables, models and reports.

Dataset (MIL table): comma separated, header ``bag_id,label,f0,...,f{d-1}``,
one instance per row, label ``+1``, ``-1`` or ``?`` and constant per bag.

Matrix: header ``<measure>:<symmetrization>:<direction>,<col ids...>``, then
one row per bag, ``<row id>,<values...>``.

Numbers are written with 17 significant digits, so values round-trip exactly.
"""

from __future__ import annotations

import csv
import json
from collections import OrderedDict
from pathlib import Path

import numpy as np

from . import __version__
from .classifiers import LinearModel, TrainConfig
from .data import Bag, Label, MILDataset
from .space import DissimMatrix, FeatureTable

_LABEL_CODES = {"+1": Label.POSITIVE, "1": Label.POSITIVE, "-1": Label.NEGATIVE,
                "?": Label.UNKNOWN}
_LABEL_OUT = {Label.POSITIVE: "+1", Label.NEGATIVE: "-1", Label.UNKNOWN: "?"}


class FormatError(ValueError):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def parse_mil_table(path) -> MILDataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if len(header) < 2 or header[0].strip() != "bag_id" or header[1].strip() != "label":
            raise FormatError(f"{path}: header must start with 'bag_id,label'")
        dim = len(header) - 2
        rows: OrderedDict[str, list] = OrderedDict()
        labels: dict[str, Label] = {}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
            bag_id, code = row[0].strip(), row[1].strip()
            if code not in _LABEL_CODES:
                raise FormatError(f"{path}:{line_no}: unknown label {code!r}")
            label = _LABEL_CODES[code]
            if labels.setdefault(bag_id, label) is not label:
                raise FormatError(f"inconsistent label: {bag_id}")
            try:
                values = [float(c) for c in row[2:]]
            except ValueError as exc:
                raise FormatError(f"{path}:{line_no}: {exc}") from None
            rows.setdefault(bag_id, []).append(values)
    bags = [Bag(b, np.array(v, dtype=np.float64).reshape(len(v), dim), labels[b])
            for b, v in rows.items()]
    return MILDataset(bags, dim)


def write_mil_table(path, dataset: MILDataset) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bag_id", "label"] + [f"f{k}" for k in range(dataset.dim)])
        for bag in dataset:
            for inst in bag.instances:
                w.writerow([bag.id, _LABEL_OUT[bag.label]] + [fmt(v) for v in inst])


def write_matrix(path, matrix: DissimMatrix) -> None:
    corner = f"{matrix.measure}:{matrix.symmetrization}:{matrix.direction}"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([corner, *matrix.cols])
        for rid, vals in zip(matrix.rows, matrix.values):
            w.writerow([rid, *(fmt(v) for v in vals)])


def read_matrix(path) -> DissimMatrix:
    with open(path, newline="") as fh:
        lines = [r for r in csv.reader(fh) if r]
    if not lines:
        raise FormatError(f"{path}: empty matrix file")
    header = lines[0]
    parts = header[0].split(":")
    measure, sym, direction = (parts + ["", "none", "to"])[:3] if len(parts) == 3 else ("", "none", "to")
    cols = header[1:]
    if len(set(cols)) != len(cols):
        raise FormatError(f"{path}: duplicate column ids")
    rows, values = [], []
    for line_no, row in enumerate(lines[1:], start=2):
        if len(row) != len(header):
            raise FormatError(f"{path}:{line_no}: {len(row) - 1} values for {len(cols)} column ids")
        rows.append(row[0])
        values.append([float(v) for v in row[1:]])
    return DissimMatrix(rows, cols, np.array(values).reshape(len(rows), len(cols)),
                        measure, sym, direction)


def write_table(path, table: FeatureTable) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bag_id", "label", *table.columns])
        for rid, lab, vals in zip(table.ids, table.labels, table.values):
            w.writerow([rid, _LABEL_OUT[lab], *(fmt(v) for v in vals)])


def read_table(path) -> FeatureTable:
    with open(path, newline="") as fh:
        lines = [r for r in csv.reader(fh) if r]
    header = lines[0]
    if header[:2] != ["bag_id", "label"]:
        raise FormatError(f"{path}: header must start with 'bag_id,label'")
    body = lines[1:]
    for line_no, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise FormatError(f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}")
    return FeatureTable([r[0] for r in body], [_LABEL_CODES[r[1]] for r in body], header[2:],
                        np.array([[float(v) for v in r[2:]] for r in body]).reshape(len(body), len(header) - 2))


# -- models -------------------------------------------------------------------
#
# One ``key: value`` pair per line. Vectors are space separated; feature
# names are a JSON list.

def write_model(path, model: LinearModel) -> None:
    vec = lambda a: " ".join(fmt(v) for v in a)  # noqa: E731
    cfg = model.config
    lines = [
        "format: mind-linear-model 1",
        f"kind: {model.kind}",
        f"C: {fmt(cfg.C)}",
        f"tolerance: {'' if cfg.tolerance is None else fmt(cfg.tolerance)}",
        f"max_iterations: {cfg.max_iterations}",
        f"seed: {cfg.seed}",
        f"standardize: {int(cfg.standardize)}",
        f"bias: {fmt(model.bias)}",
        f"weights: {vec(model.weights)}",
        f"center: {vec(model.center)}",
        f"scale: {vec(model.scale)}",
        f"features: {json.dumps(list(model.feature_names))}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def read_model(path) -> LinearModel:
    kv = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            key, _, value = line.partition(":")
            kv[key.strip()] = value.strip()
    vec = lambda s: np.array([float(v) for v in s.split()], dtype=np.float64)  # noqa: E731
    cfg = TrainConfig(C=float(kv["C"]),
                      tolerance=float(kv["tolerance"]) if kv["tolerance"] else None,
                      max_iterations=int(kv["max_iterations"]), seed=int(kv["seed"]),
                      standardize=bool(int(kv["standardize"])))
    return LinearModel(vec(kv["weights"]), float(kv["bias"]), kv["kind"], cfg,
                       tuple(json.loads(kv["features"])), vec(kv["center"]), vec(kv["scale"]))


# -- reports ------------------------------------------------------------------

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_report(path, kind: str, body: dict) -> None:
    """JSON report with toolkit version; floats use Python's exact repr."""
    doc = {"toolkit": "mind", "version": __version__, "kind": kind, **_plain(body)}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def read_report(path) -> dict:
    return json.loads(Path(path).read_text())
