"""Linear classifiers on feature tables: L2 logistic regression and soft-margin SVM.

Both minimise ``0.5 * ||w||^2 + C * sum(loss(y * (w.z + b)))`` with an
unregularised bias. Features are standardised with training statistics
unless ``TrainConfig.standardize`` is off.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from .space import FeatureTable

log = logging.getLogger(__name__)


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    tolerance: float | None = None
    max_iterations: int = 10000
    seed: int = 0
    standardize: bool = True

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError("C must be positive")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    def resolved_tolerance(self, kind: str) -> float:
        if self.tolerance is not None:
            return self.tolerance
        return 1e-6 if kind == "logistic" else 1e-4

    def as_dict(self) -> dict:
        return {"C": self.C, "tolerance": self.tolerance,
                "max_iterations": self.max_iterations, "seed": self.seed,
                "standardize": self.standardize}


@dataclass(frozen=True, eq=False)
class LinearModel:
    weights: np.ndarray
    bias: float
    kind: str
    config: TrainConfig
    feature_names: tuple[str, ...]
    center: np.ndarray
    scale: np.ndarray
    iterations: int = 0
    objective_trace: tuple[float, ...] = field(default=(), repr=False)
    train_scores: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_features(self) -> int:
        return self.weights.size

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (values - self.center) / self.scale

    def same_parameters(self, other: "LinearModel") -> bool:
        return (
            self.kind == other.kind
            and self.bias == other.bias
            and self.weights.tobytes() == other.weights.tobytes()
            and self.center.tobytes() == other.center.tobytes()
            and self.scale.tobytes() == other.scale.tobytes()
        )


def _design(table: FeatureTable, config: TrainConfig):
    y = table.signs()
    if np.any(y == 0):
        raise ValueError("training table contains bags with unknown labels")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("training data must contain both classes")
    X = table.values
    if config.standardize:
        center = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale <= 1e-12 * np.maximum(1.0, np.abs(center))] = 1.0
    else:
        center = np.zeros(X.shape[1])
        scale = np.ones(X.shape[1])
    return (X - center) / scale, y.astype(np.float64), center, scale


def _finish(kind, w, b, config, table, center, scale, iterations, trace) -> LinearModel:
    model = LinearModel(w, float(b), kind, config, table.columns, center, scale,
                        iterations, tuple(trace))
    return replace(model, train_scores=predict_scores(model, table))


# -- logistic regression ------------------------------------------------------

def logistic_objective(theta: np.ndarray, X: np.ndarray, y: np.ndarray, C: float) -> float:
    """Objective at ``theta = [w, b]``."""
    w, b = theta[:-1], theta[-1]
    margins = y * (X @ w + b)
    return 0.5 * float(w @ w) + C * float(np.sum(np.logaddexp(0.0, -margins)))


def logistic_gradient(theta: np.ndarray, X: np.ndarray, y: np.ndarray, C: float) -> np.ndarray:
    w, b = theta[:-1], theta[-1]
    coef = -C * y * expit(-y * (X @ w + b))
    grad = np.empty_like(theta)
    grad[:-1] = w + X.T @ coef
    grad[-1] = coef.sum()
    return grad


def _cg(hess_vec, rhs, tol, max_iter):
    x = np.zeros_like(rhs)
    r = rhs.copy()
    p = r.copy()
    rr = r @ r
    for _ in range(max_iter):
        if math.sqrt(rr) <= tol:
            break
        hp = hess_vec(p)
        curv = p @ hp
        if curv <= 0:
            break
        step = rr / curv
        x += step * p
        r -= step * hp
        rr_new = r @ r
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x if x.any() else rhs


def train_logistic(table: FeatureTable, config: TrainConfig | None = None) -> LinearModel:
    """L2-regularised logistic regression by truncated Newton with backtracking.

    Stops when the gradient norm drops below ``config.tolerance``
    (default 1e-6). Only steps that decrease the objective are accepted.
    """
    config = config or TrainConfig()
    X, y, center, scale = _design(table, config)
    C = config.C
    tol = config.resolved_tolerance("logistic")
    n, p = X.shape
    theta = np.zeros(p + 1)
    f = logistic_objective(theta, X, y, C)
    trace = [f]
    for it in range(config.max_iterations):
        g = logistic_gradient(theta, X, y, C)
        gnorm = float(np.linalg.norm(g))
        if gnorm <= tol:
            break
        s = expit(X @ theta[:-1] + theta[-1])
        curvature = C * s * (1.0 - s)

        def hess_vec(v):
            u = curvature * (X @ v[:-1] + v[-1])
            out = np.empty_like(v)
            out[:-1] = v[:-1] + X.T @ u
            out[-1] = u.sum()
            return out

        direction = _cg(hess_vec, -g, min(0.1, math.sqrt(gnorm)) * gnorm, 4 * (p + 1))
        slope = float(g @ direction)
        if slope >= 0:
            direction, slope = -g, -gnorm * gnorm
        step = 1.0
        while True:
            candidate = theta + step * direction
            f_new = logistic_objective(candidate, X, y, C)
            if f_new <= f + 1e-4 * step * slope:
                break
            step *= 0.5
            if step < 1e-20:
                raise ConvergenceError(
                    f"line search failed at iteration {it}; gradient norm {gnorm:.3e}")
        theta, f = candidate, f_new
        trace.append(f)
    else:
        g = logistic_gradient(theta, X, y, C)
        gnorm = float(np.linalg.norm(g))
        if gnorm > tol:
            raise ConvergenceError(
                f"logistic regression did not converge in {config.max_iterations} "
                f"iterations; gradient norm {gnorm:.3e}")
    return _finish("logistic", theta[:-1].copy(), theta[-1], config, table, center, scale,
                   len(trace) - 1, trace)


# -- linear SVM ---------------------------------------------------------------

def svm_primal(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, C: float) -> float:
    hinge = np.maximum(0.0, 1.0 - y * (X @ w + b))
    return 0.5 * float(w @ w) + C * float(hinge.sum())


def _best_bias(scores: np.ndarray, y: np.ndarray, guess: float) -> float:
    """Bias minimising the summed hinge loss for fixed weights."""
    def loss(b):
        return float(np.maximum(0.0, 1.0 - y * (scores + b)).sum())

    breaks = np.unique(y - scores)
    best_b, best = guess, loss(guess)
    for chunk in np.array_split(breaks, max(1, breaks.size // 512)):
        vals = np.maximum(0.0, 1.0 - y[None, :] * (scores[None, :] + chunk[:, None])).sum(axis=1)
        k = int(np.argmin(vals))
        if vals[k] < best:
            best, best_b = float(vals[k]), float(chunk[k])
    return best_b


def train_linear_svm(table: FeatureTable, config: TrainConfig | None = None) -> LinearModel:
    """Soft-margin linear SVM trained in the dual by SMO.

    Working pairs are chosen with second-order information. Training stops
    once the relative duality gap ``(P - D) / P`` is below
    ``config.tolerance`` (default 1e-4). ``max_iterations`` counts sweeps of
    ``n`` pair updates. The recorded objective is the dual one, which SMO
    decreases at every update.
    """
    config = config or TrainConfig()
    X, y, center, scale = _design(table, config)
    C = config.C
    tol = config.resolved_tolerance("svm")
    n = X.shape[0]
    K = X @ X.T
    Q = (y[:, None] * y[None, :]) * K
    diag = np.diag(Q).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)
    trace = [0.0]
    kkt_eps = 1e-3
    budget = config.max_iterations * max(n, 1)
    updates = 0
    tau = 1e-12

    while True:
        # pair selection (maximal violating pair, second-order j)
        yg = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        big_m = np.max(np.where(up, yg, -np.inf))
        small_m = np.min(np.where(low, yg, np.inf))
        if big_m - small_m <= kkt_eps or updates >= budget:
            w = X.T @ (alpha * y)
            scores = X @ w
            free = (alpha > 0) & (alpha < C)
            guess = float(np.mean(yg[free])) if free.any() else 0.5 * (big_m + small_m)
            b = _best_bias(scores, y, guess)
            primal = svm_primal(w, b, X, y, C)
            dual = -trace[-1]
            if primal - dual <= tol * max(abs(primal), 1e-12):
                break
            if updates >= budget:
                raise ConvergenceError(
                    f"SVM did not converge in {config.max_iterations} sweeps; relative "
                    f"duality gap {(primal - dual) / max(abs(primal), 1e-12):.3e}")
            if big_m - small_m <= kkt_eps:
                kkt_eps /= 10.0
                if kkt_eps < 1e-15:
                    break
            continue

        i = int(np.argmax(np.where(up, yg, -np.inf)))
        b_it = big_m - yg
        cand = low & (b_it > 0)
        a_it = diag[i] + diag - 2.0 * y[i] * y * Q[i]
        a_it = np.where(a_it > 0, a_it, tau)
        j = int(np.argmin(np.where(cand, -(b_it * b_it) / a_it, np.inf)))

        # analytic two-variable update, clipped to the box
        yi, yj = y[i], y[j]
        quad = max(diag[i] + diag[j] - 2.0 * yi * yj * Q[i, j], tau)
        ai_old, aj_old = alpha[i], alpha[j]
        delta = (-yi * grad[i] + yj * grad[j]) / quad
        ai = ai_old + yi * delta
        aj = aj_old - yj * delta
        total = yi * ai_old + yj * aj_old
        ai = min(max(ai, 0.0), C)
        aj = yj * (total - yi * ai)
        aj = min(max(aj, 0.0), C)
        ai = yi * (total - yj * aj)
        ai = min(max(ai, 0.0), C)
        d_i, d_j = ai - ai_old, aj - aj_old
        alpha[i], alpha[j] = ai, aj
        grad += Q[:, i] * d_i + Q[:, j] * d_j
        trace.append(0.5 * float(alpha @ (grad - 1.0)))
        updates += 1

    return _finish("svm", w, b, config, table, center, scale, updates, trace)


# -- prediction ---------------------------------------------------------------

def predict_scores(model: LinearModel, table: FeatureTable) -> np.ndarray:
    """Real-valued decision scores ``w.z + b`` on standardised features."""
    if table.values.shape[1] != model.n_features:
        raise ValueError(f"table has {table.values.shape[1]} features, model expects "
                         f"{model.n_features}")
    return model.transform(table.values) @ model.weights + model.bias


def predict_proba(model: LinearModel, table: FeatureTable) -> np.ndarray:
    return expit(predict_scores(model, table))


def train(table: FeatureTable, kind: str, config: TrainConfig | None = None) -> LinearModel:
    if kind == "logistic":
        return train_logistic(table, config)
    if kind == "svm":
        return train_linear_svm(table, config)
    raise ValueError(f"unknown classifier {kind!r}")
