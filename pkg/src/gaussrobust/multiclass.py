"""Primal multiclass training over the robust sum-of-hinges loss.

The per-sample loss adds one binary robust hinge per competing class on the
difference vector w_y - w_c (label +1), which is what the isotropic
spectral-budget adversary induces. The basic trainer updates every class
vector for the sampled point; the doubly-stochastic variant also randomizes
which single class vector moves each iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .linear import TrainConfig, _Tracker, _phi_vec, _Phi_vec
from .robust import SCALE_FLOOR, MulticlassModel
from .scalars import gauss_cdf, gauss_pdf

__all__ = [
    "MulticlassTrainReport",
    "train_m_guru",
    "train_m_guru_s2",
    "multiclass_predict",
    "multiclass_asvc_loss",
    "multiclass_objective",
]


@dataclass(frozen=True)
class MulticlassTrainReport:
    final_model: MulticlassModel
    objective_trace: tuple[tuple[int, float], ...]
    iterations_run: int
    converged: bool


def _check_multiclass(data: Dataset) -> tuple[np.ndarray, np.ndarray, int]:
    if data.kind != "multiclass":
        raise ValueError("multiclass trainer needs integer labels 1..C with C >= 2")
    c = data.n_classes
    if c < 2:
        raise ValueError("need at least two classes")
    return data.X, data.y, c


def multiclass_objective(X: np.ndarray, y: np.ndarray, W: np.ndarray, sigma: float) -> float:
    """Sum over samples and competing classes of the robust hinge on w_y - w_c."""
    total = 0.0
    c_count = W.shape[0]
    for yc in range(1, c_count + 1):
        rows = y == yc
        if not np.any(rows):
            continue
        Xr = X[rows]
        for c in range(1, c_count + 1):
            if c == yc:
                continue
            dw = W[yc - 1] - W[c - 1]
            margins = 1.0 - Xr @ dw
            scale = sigma * float(np.linalg.norm(dw))
            if scale < SCALE_FLOOR:
                total += float(np.sum(np.maximum(margins, 0.0)))
            else:
                z = margins / scale
                total += float(np.sum(margins * _Phi_vec(z) + scale * _phi_vec(z)))
    return total


def _pair_grad(dw: np.ndarray, sigma: float, x: np.ndarray) -> np.ndarray:
    margin = 1.0 - float(dw @ x)
    nw = float(np.linalg.norm(dw))
    scale = sigma * nw
    if scale < SCALE_FLOOR:
        step = 1.0 if margin > 0.0 else (0.0 if margin < 0.0 else 0.5)
        return -step * x
    z = margin / scale
    return (-gauss_cdf(z)) * x + (sigma * gauss_pdf(z) / nw) * dw


def _run(data: Dataset, sigma: float, cfg: TrainConfig, single_vector: bool) -> MulticlassTrainReport:
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    X, y, c_count = _check_multiclass(data)
    m, d = X.shape
    rng = np.random.default_rng(cfg.seed)
    W = np.zeros((c_count, d))
    tracker = _Tracker(cfg.epsilon)
    tracker.record(0, multiclass_objective(X, y, W, sigma), W.copy())
    t = 0
    for t in range(1, cfg.max_iters + 1):
        i = int(rng.integers(m))
        eta = cfg.eta0 / math.sqrt(t)
        xi = X[i]
        yi = int(y[i])
        wy = W[yi - 1]
        if single_vector:
            r = int(rng.integers(c_count)) + 1
            if r == yi:
                grad = np.zeros(d)
                for c in range(1, c_count + 1):
                    if c != yi:
                        grad += _pair_grad(wy - W[c - 1], sigma, xi)
                W[yi - 1] -= eta * grad
            else:
                W[r - 1] += eta * _pair_grad(wy - W[r - 1], sigma, xi)
        else:
            grads = {}
            for c in range(1, c_count + 1):
                if c != yi:
                    grads[c] = _pair_grad(wy - W[c - 1], sigma, xi)
            total = np.zeros(d)
            for c, g in grads.items():
                total += g
                W[c - 1] += eta * g
            W[yi - 1] -= eta * total
        if t % cfg.eval_period == 0 or t == cfg.max_iters:
            if tracker.record(t, multiclass_objective(X, y, W, sigma), W.copy()):
                break
    return MulticlassTrainReport(
        final_model=MulticlassModel(tracker.best_snapshot, sigma),
        objective_trace=tuple(tracker.trace),
        iterations_run=t,
        converged=tracker.converged,
    )


def train_m_guru(data: Dataset, sigma: float, cfg: TrainConfig) -> MulticlassTrainReport:
    """SGD updating all C class vectors for each sampled point."""
    return _run(data, sigma, cfg, single_vector=False)


def train_m_guru_s2(data: Dataset, sigma: float, cfg: TrainConfig) -> MulticlassTrainReport:
    """Doubly-stochastic SGD: per iteration, one sampled point moves one
    uniformly drawn class vector (the drawn class may be the sample's own)."""
    return _run(data, sigma, cfg, single_vector=True)


def multiclass_predict(model: MulticlassModel, x) -> int:
    """Class with the largest score w_y . x; ties break to the lowest index."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.dim,):
        raise ValueError(f"dimension mismatch: expected {model.dim}, got {x.shape}")
    return int(np.argmax(model.weights @ x)) + 1


def multiclass_predict_batch(model: MulticlassModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return np.argmax(X @ model.weights.T, axis=1) + 1


def multiclass_asvc_loss(model: MulticlassModel, delta: float, x, y: int) -> float:
    """Worst-case multi-hinge over a delta-ball displacement.

    max over classes of [margin_{y'} - (w_y - w_y')^T x + delta*||w_y - w_y'||]
    with margin 1 against competitors and 0 for the sample's own class (so
    the self term contributes 0 and the loss is nonnegative). delta = 0
    recovers the plain multi-hinge; for C = 2 this is the binary ball-robust
    hinge on w_+ - w_-.
    """
    if delta < 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta!r}")
    x = np.asarray(x, dtype=np.float64)
    y = int(y)
    if not 1 <= y <= model.n_classes:
        raise ValueError(f"class index {y} outside 1..{model.n_classes}")
    wy = model.weights[y - 1]
    best = 0.0  # the y' = y term
    for c in range(model.n_classes):
        if c == y - 1:
            continue
        dw = wy - model.weights[c]
        term = 1.0 - float(dw @ x) + delta * float(np.linalg.norm(dw))
        best = max(best, term)
    return best
