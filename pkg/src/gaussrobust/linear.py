"""Stochastic-gradient trainers for linear classifiers.

train_guru minimizes the unregularized sum of robust hinge losses with the
step schedule eta0/sqrt(t); each update factors into a shrink of the whole
weight vector by gamma plus a bump of eta*Phi(z) along y*x, the same split
the kernelized trainer preserves in coefficient space.

train_baseline_svm is the experiment-parity stand-in for an off-the-shelf
SVM: hinge loss plus (lambda/2)*||w||^2, driven by the identical eta0/sqrt(t)
schedule and sampling scheme so that only the loss function differs.

train_asvc alternates that SVM with the closed-form ball adversary, and
batch_refine polishes any model to near-stationarity with full-gradient
descent (needed to certify duality downstream).

Sample indices are drawn uniformly with replacement from numpy's seeded
PCG64 generator; identical (data, config) inputs reproduce runs bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .data import Dataset
from .robust import SCALE_FLOOR, LinearModel, asvc_displacement
from .scalars import SQRT_2PI, gauss_cdf, gauss_pdf

__all__ = [
    "TrainConfig",
    "TrainReport",
    "RefineResult",
    "train_guru",
    "train_baseline_svm",
    "train_asvc",
    "batch_refine",
    "robust_objective",
    "robust_objective_gradient",
    "hinge_objective",
    "asvc_objective",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class TrainConfig:
    """Knobs shared by every SGD trainer in the package."""

    eta0: float = 0.5
    epsilon: float = 1e-4
    max_iters: int = 20000
    seed: int = 0
    eval_period: int = 1000

    def __post_init__(self):
        if not self.eta0 > 0.0:
            raise ValueError("eta0 must be positive")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.eval_period < 1:
            raise ValueError("eval_period must be at least 1")


@dataclass(frozen=True)
class TrainReport:
    """Outcome of one training run.

    final_model is the evaluated iterate with the lowest full objective
    (evaluations happen at iteration 0, every eval_period steps, and at the
    last step). objective_trace lists those (iteration, objective) pairs.
    """

    final_model: LinearModel
    objective_trace: tuple[tuple[int, float], ...]
    iterations_run: int
    converged: bool


def _phi_vec(z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * z * z) / SQRT_2PI


def _Phi_vec(z: np.ndarray) -> np.ndarray:
    return 0.5 * erfc(-z / _SQRT2)


def robust_objective(X: np.ndarray, y: np.ndarray, w: np.ndarray, sigma: float) -> float:
    """Full robust-hinge objective: sum over samples of the perspective loss."""
    margins = 1.0 - y * (X @ w)
    scale = sigma * float(np.linalg.norm(w))
    if scale < SCALE_FLOOR:
        return float(np.sum(np.maximum(margins, 0.0)))
    z = margins / scale
    return float(np.sum(margins * _Phi_vec(z) + scale * _phi_vec(z)))


def robust_objective_gradient(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, sigma: float
) -> np.ndarray:
    """Gradient of robust_objective; requires ||w|| large enough to be smooth."""
    nw = float(np.linalg.norm(w))
    scale = sigma * nw
    margins = 1.0 - y * (X @ w)
    if scale < SCALE_FLOOR:
        active = (margins > 0.0).astype(np.float64) + 0.5 * (margins == 0.0)
        return -(X.T @ (y * active))
    z = margins / scale
    return -(X.T @ (y * _Phi_vec(z))) + (sigma * float(np.sum(_phi_vec(z))) / nw) * w


def hinge_objective(X: np.ndarray, y: np.ndarray, w: np.ndarray, lam: float) -> float:
    """SVM objective (lambda/2)*||w||^2 + sum of hinge losses."""
    margins = 1.0 - y * (X @ w)
    return 0.5 * lam * float(w @ w) + float(np.sum(np.maximum(margins, 0.0)))


def asvc_objective(X: np.ndarray, y: np.ndarray, w: np.ndarray, delta: float, lam: float) -> float:
    """Worst-case-displacement objective: sum [1 - y*w.x + delta*||w||]_+ + (lambda/2)||w||^2."""
    margins = 1.0 - y * (X @ w) + delta * float(np.linalg.norm(w))
    return 0.5 * lam * float(w @ w) + float(np.sum(np.maximum(margins, 0.0)))


def _check_binary(data: Dataset) -> tuple[np.ndarray, np.ndarray]:
    if data.kind != "binary":
        raise ValueError("binary trainer needs labels in {-1, +1}")
    return data.X, data.y.astype(np.float64)


class _Tracker:
    """Shared evaluate/stop/best-model bookkeeping for the SGD loops."""

    def __init__(self, epsilon: float):
        self.epsilon = epsilon
        self.trace: list[tuple[int, float]] = []
        self.best_obj = math.inf
        self.best_snapshot = None
        self.prev_obj: float | None = None
        self.converged = False

    def record(self, iteration: int, obj: float, snapshot) -> bool:
        """Store an evaluation; returns True when training should stop."""
        if not math.isfinite(obj):
            raise FloatingPointError(f"objective became non-finite at iteration {iteration}")
        self.trace.append((iteration, obj))
        if obj < self.best_obj:
            self.best_obj = obj
            self.best_snapshot = snapshot
        if self.prev_obj is not None and abs(self.prev_obj - obj) < self.epsilon * (1.0 + abs(obj)):
            self.converged = True
        self.prev_obj = obj
        return self.converged


def train_guru(data: Dataset, sigma: float, cfg: TrainConfig) -> TrainReport:
    """SGD on the robust hinge objective from a zero start.

    Draws one sample per iteration, steps by eta0/sqrt(t), stops once two
    consecutive full-objective evaluations agree to within epsilon relative
    (or at max_iters). Deterministic for a fixed config.
    """
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    X, y = _check_binary(data)
    m, d = X.shape
    rng = np.random.default_rng(cfg.seed)
    w = np.zeros(d)
    tracker = _Tracker(cfg.epsilon)
    tracker.record(0, robust_objective(X, y, w, sigma), w.copy())
    t = 0
    for t in range(1, cfg.max_iters + 1):
        i = int(rng.integers(m))
        eta = cfg.eta0 / math.sqrt(t)
        xi = X[i]
        yi = y[i]
        margin = 1.0 - yi * float(w @ xi)
        nw = float(np.linalg.norm(w))
        scale = sigma * nw
        if scale < SCALE_FLOOR:
            erf_term = 1.0 if margin > 0.0 else (0.0 if margin < 0.0 else 0.5)
            gamma = 1.0
        else:
            z = margin / scale
            erf_term = gauss_cdf(z)
            gamma = 1.0 - eta * sigma * gauss_pdf(z) / nw
        mu = eta * erf_term
        w *= gamma
        w += (mu * yi) * xi
        if t % cfg.eval_period == 0 or t == cfg.max_iters:
            if tracker.record(t, robust_objective(X, y, w, sigma), w.copy()):
                break
    return TrainReport(
        final_model=LinearModel(tracker.best_snapshot, sigma),
        objective_trace=tuple(tracker.trace),
        iterations_run=t,
        converged=tracker.converged,
    )


def train_baseline_svm(data: Dataset, lam: float, cfg: TrainConfig) -> TrainReport:
    """Hinge + L2 SGD with the same schedule and sampling scheme as train_guru.

    The per-sample stochastic gradient is (lam/M)*w plus the hinge
    subgradient, so the full objective matches (lam/2)*||w||^2 + sum hinge.
    The returned model carries sigma = 1.0 as a placeholder; hinge-based
    models never evaluate the robust loss.
    """
    if not lam > 0.0:
        raise ValueError("lambda must be positive")
    X, y = _check_binary(data)
    m, d = X.shape
    rng = np.random.default_rng(cfg.seed)
    w = np.zeros(d)
    reg = lam / m
    tracker = _Tracker(cfg.epsilon)
    tracker.record(0, hinge_objective(X, y, w, lam), w.copy())
    t = 0
    for t in range(1, cfg.max_iters + 1):
        i = int(rng.integers(m))
        eta = cfg.eta0 / math.sqrt(t)
        xi = X[i]
        yi = y[i]
        violated = 1.0 - yi * float(w @ xi) > 0.0
        # When eta*lam/m > 1 the linearized shrink would overshoot the
        # regularizer's minimizer at 0 and oscillate divergently for huge
        # lambda; truncate the sub-step there.
        w *= max(1.0 - eta * reg, 0.0)
        if violated:
            w += (eta * yi) * xi
        if t % cfg.eval_period == 0 or t == cfg.max_iters:
            if tracker.record(t, hinge_objective(X, y, w, lam), w.copy()):
                break
    return TrainReport(
        final_model=LinearModel(tracker.best_snapshot, 1.0),
        objective_trace=tuple(tracker.trace),
        iterations_run=t,
        converged=tracker.converged,
    )


def train_asvc(
    data: Dataset, delta: float, lam: float, rounds: int, cfg: TrainConfig
) -> LinearModel:
    """Alternating optimization: SVM rounds against the closed-form ball adversary.

    The first round runs the plain SVM (the displacement is undefined at
    w = 0); every later round displaces each sample to its worst-case point
    x + y*dx with dx = -delta*w/||w|| and re-solves. Rounds stop early once
    the weight vector is a fixed point; the model returned is the round
    minimizing the effective objective on the original data.
    """
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    X, y = _check_binary(data)
    w = train_baseline_svm(data, lam, cfg).final_model.w
    best_obj = asvc_objective(X, y, w, delta, lam)
    best_w = w
    for _ in range(1, rounds):
        if delta == 0.0 or float(np.linalg.norm(w)) == 0.0:
            break
        dx = asvc_displacement(w, delta)
        shifted = Dataset(X + np.outer(y, dx), data.y, name=data.name)
        w_next = train_baseline_svm(shifted, lam, cfg).final_model.w
        obj = asvc_objective(X, y, w_next, delta, lam)
        if obj < best_obj:
            best_obj = obj
            best_w = w_next
        if float(np.linalg.norm(w_next - w)) <= 1e-6 * (1.0 + float(np.linalg.norm(w))):
            w = w_next
            break
        w = w_next
    return LinearModel(best_w, 1.0)


@dataclass(frozen=True)
class RefineResult:
    """Outcome of batch_refine: polished model plus stationarity diagnostics."""

    model: LinearModel
    objective: float
    grad_norm: float
    iterations: int
    converged: bool


def batch_refine(
    data: Dataset,
    sigma: float,
    model: LinearModel,
    grad_tol: float = 1e-8,
    max_iters: int = 50000,
) -> RefineResult:
    """Full-gradient descent with backtracking until the gradient norm <= grad_tol.

    The objective is strictly convex away from w = 0, so descent steps with
    an Armijo condition converge; every accepted step strictly decreases the
    objective. Raises if the objective turns non-finite or the iterate
    collapses onto w = 0 where the loss is not differentiable.
    """
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    X, y = _check_binary(data)
    w = model.w.copy()
    if float(np.linalg.norm(w)) == 0.0:
        raise ValueError("batch_refine needs a nonzero starting point")
    obj = robust_objective(X, y, w, sigma)
    if not math.isfinite(obj):
        raise FloatingPointError("non-finite objective at the starting point")
    grad = robust_objective_gradient(X, y, w, sigma)
    gn = float(np.linalg.norm(grad))
    step = 1.0 / (1.0 + gn)
    w_prev = None
    grad_prev = None
    iterations = 0
    while gn > grad_tol and iterations < max_iters:
        iterations += 1
        # Barzilai-Borwein trial step (falls back to growing the last
        # accepted step), then Armijo backtracking to keep strict descent.
        trial = 2.0 * step
        if w_prev is not None:
            dw = w - w_prev
            dg = grad - grad_prev
            curv = float(dw @ dg)
            if curv > 0.0:
                bb = float(dw @ dw) / curv
                if math.isfinite(bb) and bb > 0.0:
                    trial = bb
        while True:
            w_next = w - trial * grad
            obj_next = robust_objective(X, y, w_next, sigma)
            if math.isfinite(obj_next) and obj_next <= obj - 1e-6 * trial * gn * gn:
                break
            trial *= 0.5
            if trial < 1e-18:
                raise FloatingPointError("backtracking failed to find a descent step")
        step = trial
        w_prev = w
        grad_prev = grad
        w = w_next
        obj = obj_next
        if float(np.linalg.norm(w)) < SCALE_FLOOR:
            raise FloatingPointError("iterate collapsed onto w = 0")
        grad = robust_objective_gradient(X, y, w, sigma)
        gn = float(np.linalg.norm(grad))
    return RefineResult(
        model=LinearModel(w, sigma),
        objective=obj,
        grad_norm=gn,
        iterations=iterations,
        converged=gn <= grad_tol,
    )
