"""Robust hinge losses over weight vectors and the adversarial covariance choices.

The central object is the worst-case expected hinge loss under a zero-mean
Gaussian perturbation whose covariance the adversary picks inside a budget
set. For a trace budget beta = sigma^2 the worst covariance is the rank-one
matrix beta * w w^T / ||w||^2 and the loss collapses to the perspective form

    loss(x, y; w, sigma) = sigma*||w|| * f((1 - y*w.x) / (sigma*||w||))

with f the smooth hinge from :mod:`gaussrobust.scalars`. Under a spectral
budget (the multiclass setting) the worst covariance is beta * I, and under
a diagonal-trace budget it concentrates on the axis where w^2 is largest.

At w = 0 the perspective is undefined but the limit exists: the loss value
is the plain hinge at margin 1 (i.e. 1 per sample) and the gradient tends
to -y*x; both conventions are applied below whenever sigma*||w|| underflows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .scalars import ScalarLoss, gauss_cdf, gauss_pdf, perspective

__all__ = [
    "LinearModel",
    "MulticlassModel",
    "CovarianceConstraint",
    "CovarianceChoice",
    "robust_hinge",
    "robust_hinge_gradient",
    "adversarial_covariance",
    "adversarial_covariance_is_optimal",
    "asvc_displacement",
    "asvc_robust_hinge",
    "multiclass_sum_loss",
    "multiclass_sum_gradient",
]

# Below this value of sigma*||w|| the perspective ratio overflows; the exact
# hinge-limit formulas are used instead.
SCALE_FLOOR = 1e-300


def _as_vector(x, dim: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {x.shape[0]}")
    return x


@dataclass(frozen=True)
class LinearModel:
    """Weight vector plus the noise scale sigma (the budget is beta = sigma^2)."""

    w: np.ndarray
    sigma: float

    def __post_init__(self):
        w = _as_vector(self.w)
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "w", w)
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma!r}")

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.w))

    def decision_values(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return X @ self.w

    def predict(self, X) -> np.ndarray:
        """Labels in {-1, +1}; ties on the hyperplane go to +1."""
        return np.where(self.decision_values(X) >= 0.0, 1, -1)


@dataclass(frozen=True)
class MulticlassModel:
    """One weight vector per class (classes are 1..C), sharing a noise scale."""

    weights: np.ndarray
    sigma: float

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[0] < 2:
            raise ValueError("weights must be a (C, d) array with C >= 2")
        if not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "weights", weights)
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma!r}")

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def _check_class(model: MulticlassModel, y: int) -> int:
    y = int(y)
    if not 1 <= y <= model.n_classes:
        raise ValueError(f"class index {y} outside 1..{model.n_classes}")
    return y


def robust_hinge(model: LinearModel, x, y: int) -> float:
    """Worst-case expected hinge loss of one sample under the trace budget."""
    x = _as_vector(x, model.dim)
    margin = 1.0 - y * float(model.w @ x)
    scale = model.sigma * model.norm
    if scale < SCALE_FLOOR:
        return max(margin, 0.0)
    return perspective(ScalarLoss.ERF, scale, margin)


def robust_hinge_gradient(model: LinearModel, x, y: int) -> np.ndarray:
    """Gradient of robust_hinge with respect to w.

    Equals -y*x*Phi(z) + sigma*phi(z)*w/||w|| with z = margin/(sigma*||w||).
    At w = 0 (or when the scale underflows) the hinge-limit gradient is used.
    """
    x = _as_vector(x, model.dim)
    margin = 1.0 - y * float(model.w @ x)
    nw = model.norm
    scale = model.sigma * nw
    if scale < SCALE_FLOOR:
        if margin > 0.0:
            step = 1.0
        elif margin < 0.0:
            step = 0.0
        else:
            step = 0.5
        return (-y * step) * x
    z = margin / scale
    return (-y * gauss_cdf(z)) * x + (model.sigma * gauss_pdf(z) / nw) * model.w


class CovarianceConstraint(enum.Enum):
    """Budget families the adversary may draw a covariance matrix from."""

    TRACE = "trace"
    SPECTRAL = "spectral"
    DIAGONAL_TRACE = "diagonal_trace"


@dataclass(frozen=True)
class CovarianceChoice:
    """A PSD covariance matrix stored in factored form.

    TRACE holds budget * u u^T for a unit direction u, SPECTRAL holds
    budget * I, and DIAGONAL_TRACE concentrates the whole budget on one axis.
    """

    constraint: CovarianceConstraint
    budget: float
    dim: int
    direction: np.ndarray | None = None
    axis: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.budget) and self.budget > 0.0):
            raise ValueError(f"budget must be positive, got {self.budget!r}")
        if self.constraint is CovarianceConstraint.TRACE:
            u = _as_vector(self.direction, self.dim)
            object.__setattr__(self, "direction", u)
        elif self.constraint is CovarianceConstraint.DIAGONAL_TRACE:
            if self.axis is None or not 0 <= self.axis < self.dim:
                raise ValueError("diagonal choice needs an axis inside 0..dim-1")

    def dense(self) -> np.ndarray:
        if self.constraint is CovarianceConstraint.TRACE:
            return self.budget * np.outer(self.direction, self.direction)
        if self.constraint is CovarianceConstraint.SPECTRAL:
            return self.budget * np.eye(self.dim)
        out = np.zeros((self.dim, self.dim))
        out[self.axis, self.axis] = self.budget
        return out

    def quadratic_form(self, v) -> float:
        v = _as_vector(v, self.dim)
        if self.constraint is CovarianceConstraint.TRACE:
            return self.budget * float(self.direction @ v) ** 2
        if self.constraint is CovarianceConstraint.SPECTRAL:
            return self.budget * float(v @ v)
        return self.budget * float(v[self.axis]) ** 2


def adversarial_covariance(
    constraint: CovarianceConstraint, budget: float, w
) -> CovarianceChoice:
    """The covariance maximizing w^T Sigma w inside the given budget set.

    TRACE: rank-one along w (value budget*||w||^2). SPECTRAL: budget * I
    (value budget*||w||^2). DIAGONAL_TRACE: the whole budget on the axis
    with the largest w_i^2, lowest index winning ties (value budget*max w_i^2).
    """
    w = _as_vector(w)
    d = w.shape[0]
    if constraint is CovarianceConstraint.SPECTRAL:
        return CovarianceChoice(constraint, budget, d)
    nw = float(np.linalg.norm(w))
    if nw == 0.0:
        raise ValueError("direction undefined at w = 0 for this constraint family")
    if constraint is CovarianceConstraint.TRACE:
        return CovarianceChoice(constraint, budget, d, direction=w / nw)
    if constraint is CovarianceConstraint.DIAGONAL_TRACE:
        axis = int(np.argmax(w * w))
        return CovarianceChoice(constraint, budget, d, axis=axis)
    raise TypeError(f"unknown constraint {constraint!r}")


def _random_challenger(
    constraint: CovarianceConstraint, budget: float, dim: int, rng: np.random.Generator
) -> np.ndarray:
    g = rng.standard_normal((dim, dim))
    a = g @ g.T
    if constraint is CovarianceConstraint.TRACE:
        return a * (budget / np.trace(a))
    if constraint is CovarianceConstraint.SPECTRAL:
        lam_max = float(np.linalg.eigvalsh(a)[-1])
        return a * (budget / lam_max)
    diag = rng.random(dim)
    diag *= budget / diag.sum()
    return np.diag(diag)


def adversarial_covariance_is_optimal(
    choice: CovarianceChoice,
    w,
    trials: int,
    seed: int = 0,
    tol: float = 1e-10,
) -> bool:
    """Randomized check that no feasible covariance beats the stored choice.

    Samples `trials` PSD matrices from the same budget family and returns
    True iff w^T Sigma* w >= w^T Sigma w - tol for every challenger.
    """
    w = _as_vector(w, choice.dim)
    achieved = choice.quadratic_form(w)
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        sigma = _random_challenger(choice.constraint, choice.budget, choice.dim, rng)
        if achieved < float(w @ sigma @ w) - tol:
            return False
    return True


def asvc_displacement(w, delta: float) -> np.ndarray:
    """The ball adversary's optimal displacement -delta * w / ||w||."""
    w = _as_vector(w)
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    nw = float(np.linalg.norm(w))
    if nw == 0.0:
        raise ValueError("displacement undefined at w = 0")
    return (-delta / nw) * w


def asvc_robust_hinge(w, delta: float, x, y: int) -> float:
    """Worst-case hinge over a delta-ball: [1 - y*w.x + delta*||w||]_+.

    Equals the hinge at the adversarially displaced point x + y*dx with
    dx = asvc_displacement(w, delta); delta = 0 recovers the plain hinge.
    """
    w = _as_vector(w)
    if delta < 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta!r}")
    x = _as_vector(x, w.shape[0])
    return max(0.0, 1.0 - y * float(w @ x) + delta * float(np.linalg.norm(w)))


def multiclass_sum_loss(model: MulticlassModel, x, y: int) -> float:
    """Sum over competing classes of the binary robust hinge on w_y - w_c.

    Each term is the binary loss at label +1 with weight vector
    w_y - w_c (the spectral-budget adversary achieves beta*||w_y - w_c||^2
    simultaneously for all pairs). Equal weight vectors hit the removable
    w = 0 limit and contribute 1 per term.
    """
    y = _check_class(model, y)
    x = _as_vector(x, model.dim)
    total = 0.0
    wy = model.weights[y - 1]
    for c in range(model.n_classes):
        if c == y - 1:
            continue
        dw = wy - model.weights[c]
        total += robust_hinge(LinearModel(dw, model.sigma), x, +1)
    return total


def _pair_gradient(dw: np.ndarray, sigma: float, x: np.ndarray) -> np.ndarray:
    # Gradient of the binary robust hinge at label +1 w.r.t. its weight vector.
    margin = 1.0 - float(dw @ x)
    nw = float(np.linalg.norm(dw))
    scale = sigma * nw
    if scale < SCALE_FLOOR:
        if margin > 0.0:
            step = 1.0
        elif margin < 0.0:
            step = 0.0
        else:
            step = 0.5
        return -step * x
    z = margin / scale
    return (-gauss_cdf(z)) * x + (sigma * gauss_pdf(z) / nw) * dw


def multiclass_sum_gradient(model: MulticlassModel, x, y: int, r: int) -> np.ndarray:
    """Gradient of multiclass_sum_loss with respect to the class-r vector."""
    y = _check_class(model, y)
    r = _check_class(model, r)
    x = _as_vector(x, model.dim)
    wy = model.weights[y - 1]
    if r == y:
        grad = np.zeros(model.dim)
        for c in range(model.n_classes):
            if c == y - 1:
                continue
            grad += _pair_gradient(wy - model.weights[c], model.sigma, x)
        return grad
    return -_pair_gradient(wy - model.weights[r - 1], model.sigma, x)
