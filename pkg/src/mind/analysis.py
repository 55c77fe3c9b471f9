"""Diagnostics of dissimilarity matrices: NEF, NER and NMF."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .space import DissimMatrix

SYMMETRY_TOL = 1e-9
EXACT_TRIPLE_LIMIT = 600
SAMPLED_TRIPLES = 1_000_000


def _values(D) -> np.ndarray:
    return D.values if isinstance(D, DissimMatrix) else np.asarray(D, dtype=np.float64)


def _check_symmetric(a: np.ndarray, what: str):
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be square, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max())) if a.size else 1.0
    dev = float(np.abs(a - a.T).max()) if a.size else 0.0
    if dev > SYMMETRY_TOL * scale:
        raise ValueError(f"{what} is not symmetric (max deviation {dev:.3e}); symmetrize it first")


def gram_from_dissim(D, square_first: bool = False) -> np.ndarray:
    """Double-centred Gram matrix ``-0.5 * J D J``.

    ``D`` is treated as holding squared distances already; pass
    ``square_first=True`` for measures on a distance scale (e.g. EMD).
    """
    a = _values(D)
    _check_symmetric(a, "dissimilarity matrix")
    if square_first:
        a = a * a
    row = a.mean(axis=1, keepdims=True)
    col = a.mean(axis=0, keepdims=True)
    G = -0.5 * (a - row - col + a.mean())
    return 0.5 * (G + G.T)


def eig_sym(G) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, sorted descending (LAPACK ``syevd``)."""
    a = np.asarray(G, dtype=np.float64)
    _check_symmetric(a, "matrix")
    return np.linalg.eigvalsh(0.5 * (a + a.T))[::-1]


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    nef: float
    ner: float
    source: str = ""

    def as_dict(self) -> dict:
        return {"nef": self.nef, "ner": self.ner, "source": self.source,
                "eigenvalues": [float(x) for x in self.eigenvalues]}


def nef_ner(D, square_first: bool = False, source: str = "") -> SpectrumReport:
    """Negative eigenfraction and negative eigenratio of the Gram spectrum.

    Eigenvalues within ``1e-10 * lambda_max`` of zero count as zero. NER is
    0 when no eigenvalue is negative.
    """
    lam = eig_sym(gram_from_dissim(D, square_first))
    top = float(lam[0]) if lam.size else 0.0
    lam = np.where(np.abs(lam) < 1e-10 * max(top, 0.0), 0.0, lam)
    total = float(np.abs(lam).sum())
    nef = float(np.abs(lam[lam < 0]).sum() / total) if total > 0 else 0.0
    ner = float(max(0.0, -lam.min()) / top) if top > 0 else 0.0
    return SpectrumReport(lam, nef, ner, source)


@dataclass(frozen=True)
class MetricityReport:
    nmf: float
    violated: int
    total: int
    symmetry_deviation: float
    sampled: bool = False
    seed: int | None = None

    def as_dict(self) -> dict:
        return {"nmf": self.nmf, "violated": self.violated, "total": self.total,
                "symmetry_deviation": self.symmetry_deviation, "sampled": self.sampled,
                "seed": self.seed}


def nmf(D, seed: int = 0, exact_limit: int = EXACT_TRIPLE_LIMIT,
        samples: int = SAMPLED_TRIPLES) -> MetricityReport:
    """Fraction of violated triangle inequalities.

    Each unordered triple contributes three inequalities
    ``D_ik <= D_ij + D_jk``. Asymmetric input is averaged with its transpose
    first. Above ``exact_limit`` objects, ``samples`` random triples are
    checked instead.
    """
    a = _values(D)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    dev = float(np.abs(a - a.T).max()) if n else 0.0
    if dev > 0:
        a = 0.5 * (a + a.T)
    if n < 3:
        return MetricityReport(0.0, 0, 0, dev)
    eps = 1e-12 * float(a.max())

    if n <= exact_limit:
        upper = np.triu(np.ones((n, n), dtype=bool), k=1)
        violated = 0
        for j in range(n):
            mask = upper.copy()
            mask[j, :] = False
            mask[:, j] = False
            bound = a[:, j, None] + a[None, j, :] + eps
            violated += int(np.count_nonzero((a > bound) & mask))
        total = 3 * (n * (n - 1) * (n - 2) // 6)
        return MetricityReport(violated / total, violated, total, dev)

    rng = np.random.default_rng(seed)
    tri = np.empty((0, 3), dtype=np.int64)
    while tri.shape[0] < samples:
        draw = rng.integers(0, n, size=(samples, 3))
        ok = (draw[:, 0] != draw[:, 1]) & (draw[:, 0] != draw[:, 2]) & (draw[:, 1] != draw[:, 2])
        tri = np.vstack([tri, draw[ok]])
    i, j, k = tri[:samples].T
    violated = int(np.count_nonzero(a[i, k] > a[i, j] + a[j, k] + eps)
                   + np.count_nonzero(a[i, j] > a[i, k] + a[k, j] + eps)
                   + np.count_nonzero(a[j, k] > a[j, i] + a[i, k] + eps))
    total = 3 * samples
    return MetricityReport(violated / total, violated, total, dev, True, seed)

