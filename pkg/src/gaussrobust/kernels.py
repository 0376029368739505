"""Kernelized training with dual coefficients and O(1) norm maintenance.

The classifier is kept in representer form w = sum_m alpha_m y^m x^m, so only
Gram entries are ever needed. Each SGD step costs one O(M) pass: with

    zeta  = sum_m alpha_m y^m K[m, i]            (the decision value at x^i)
    gamma = 1 - eta * sigma * phi(z) / nu        (global coefficient shrink)
    mu    = eta * Phi(z)                         (bump of coefficient i)

where z = (1 - y^i zeta)/(sigma*nu), the coefficient update is
alpha <- gamma*alpha, alpha_i += mu, and the classifier norm obeys the exact
recurrence nu^2 <- gamma^2 nu^2 + 2 gamma mu y^i zeta + mu^2 K[i, i].

The global shrink is folded lazily into a scalar factor so millions of steps
cannot underflow the stored coefficients. With the linear kernel the implied
weight vector follows the primal trainer's iterates step for step.
"""

from __future__ import annotations

import enum
import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .linear import TrainConfig, _Tracker, _phi_vec, _Phi_vec
from .robust import SCALE_FLOOR
from .scalars import gauss_cdf, gauss_pdf

__all__ = [
    "KernelKind",
    "KernelSpec",
    "KernelModel",
    "kernel_eval",
    "gram_matrix",
    "ken_guru_step",
    "train_ken_guru",
    "kernel_predict",
    "kernel_decision_values",
]

# Full Gram precompute cap; larger training sets fall back to an LRU row cache.
FULL_GRAM_LIMIT = 8192
_ROW_CACHE_SIZE = 1024


class KernelKind(enum.Enum):
    LINEAR = "linear"
    POLYNOMIAL = "polynomial"
    RBF = "rbf"


@dataclass(frozen=True)
class KernelSpec:
    """A Mercer kernel: linear, polynomial (offset >= 0) or RBF (gamma > 0)."""

    kind: KernelKind
    degree: int = 2
    offset: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind is KernelKind.POLYNOMIAL:
            if self.degree < 1:
                raise ValueError("polynomial degree must be at least 1")
            if self.offset < 0.0:
                raise ValueError("polynomial offset must be nonnegative")
        if self.kind is KernelKind.RBF and not self.gamma > 0.0:
            raise ValueError("rbf gamma must be positive")


def kernel_eval(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Kernel values between the rows of A and the rows of B."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    dots = A @ B.T
    if spec.kind is KernelKind.LINEAR:
        return dots
    if spec.kind is KernelKind.POLYNOMIAL:
        return (spec.offset + dots) ** spec.degree
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * dots
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-spec.gamma * sq)


def _gram_from_rows(X: np.ndarray, spec: KernelSpec) -> np.ndarray:
    dots = X @ X.T
    # Mirror the upper triangle so symmetry holds bitwise before any transform.
    dots = np.triu(dots) + np.triu(dots, 1).T
    if spec.kind is KernelKind.LINEAR:
        return dots
    if spec.kind is KernelKind.POLYNOMIAL:
        return (spec.offset + dots) ** spec.degree
    diag = np.diag(dots)
    sq = diag[:, None] + diag[None, :] - 2.0 * dots
    np.maximum(sq, 0.0, out=sq)
    np.fill_diagonal(sq, 0.0)
    return np.exp(-spec.gamma * sq)


def gram_matrix(data: Dataset, spec: KernelSpec) -> np.ndarray:
    """Full symmetric Gram matrix of a dataset (exact diagonal, mirrored)."""
    if not np.all(np.isfinite(data.X)):
        raise ValueError("non-finite feature values")
    return _gram_from_rows(data.X, spec)


class _GramRows:
    """Row access to the Gram matrix: full precompute or an LRU row cache."""

    def __init__(self, X: np.ndarray, spec: KernelSpec):
        self.spec = spec
        self.X = X
        m = X.shape[0]
        if m <= FULL_GRAM_LIMIT:
            self.full = _gram_from_rows(X, spec)
            self.cache = None
        else:
            self.full = None
            self.cache: OrderedDict[int, np.ndarray] = OrderedDict()

    def row(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[i]
        row = self.cache.get(i)
        if row is None:
            row = kernel_eval(self.spec, self.X[i : i + 1], self.X)[0]
            self.cache[i] = row
            if len(self.cache) > _ROW_CACHE_SIZE:
                self.cache.popitem(last=False)
        else:
            self.cache.move_to_end(i)
        return row


@dataclass
class KernelModel:
    """Dual-coefficient classifier with a cached running norm.

    Effective coefficients are scale*alphas (the global shrink factor is
    folded lazily); nu tracks ||w|| through the update recurrence and is
    verifiable against the O(M^2) recomputation.
    """

    alphas: np.ndarray
    scale: float
    labels: np.ndarray
    X: np.ndarray
    nu: float
    kernel: KernelSpec
    sigma: float
    gram: _GramRows = field(repr=False)

    @property
    def n_train(self) -> int:
        return self.alphas.shape[0]

    @property
    def effective_alphas(self) -> np.ndarray:
        return self.scale * self.alphas

    def recompute_norm(self) -> float:
        """O(M^2) norm recomputation; test/verification path only."""
        v = self.effective_alphas * self.labels
        K = _gram_from_rows(self.X, self.kernel)
        return float(math.sqrt(max(float(v @ K @ v), 0.0)))

    def copy_state(self) -> tuple[np.ndarray, float, float]:
        return self.alphas.copy(), self.scale, self.nu


def _new_model(data: Dataset, kernel: KernelSpec, sigma: float) -> KernelModel:
    X, y = data.X, data.y.astype(np.float64)
    return KernelModel(
        alphas=np.zeros(data.n_samples),
        scale=1.0,
        labels=y,
        X=X,
        nu=0.0,
        kernel=kernel,
        sigma=sigma,
        gram=_GramRows(X, kernel),
    )


def ken_guru_step(model: KernelModel, i: int, t: int, eta0: float) -> KernelModel:
    """One coefficient-space SGD step on sample i at iteration t (in place).

    Cost is one O(M) Gram-row pass for zeta plus O(1) bookkeeping; the norm
    recurrence keeps nu consistent with the full recomputation. The nu = 0
    start follows the primal w = 0 limit: gamma = 1, mu = eta * 1.
    """
    if not 0 <= i < model.n_train:
        raise IndexError(f"sample index {i} out of range")
    eta = eta0 / math.sqrt(t)
    row = model.gram.row(i)
    yi = model.labels[i]
    zeta = model.scale * float((model.alphas * model.labels) @ row)
    margin = 1.0 - yi * zeta
    nu = model.nu
    scaled = model.sigma * nu
    if scaled < SCALE_FLOOR:
        erf_term = 1.0 if margin > 0.0 else (0.0 if margin < 0.0 else 0.5)
        gamma = 1.0
    else:
        z = margin / scaled
        erf_term = gauss_cdf(z)
        gamma = 1.0 - eta * model.sigma * gauss_pdf(z) / nu
    mu = eta * erf_term
    kii = float(row[i])
    nu2 = gamma * gamma * nu * nu + 2.0 * gamma * mu * yi * zeta + mu * mu * kii
    model.nu = math.sqrt(max(nu2, 0.0))
    model.scale *= gamma
    if abs(model.scale) < 1e-100:
        model.alphas *= model.scale
        model.scale = 1.0
    model.alphas[i] += mu / model.scale
    return model


def _kernel_objective(model: KernelModel) -> float:
    coeffs = model.effective_alphas * model.labels
    if model.gram.full is not None:
        decisions = model.gram.full @ coeffs
    else:
        # Row-cache mode: evaluate in chunks without materializing the Gram.
        m = model.n_train
        decisions = np.empty(m)
        chunk = 512
        for lo in range(0, m, chunk):
            hi = min(lo + chunk, m)
            decisions[lo:hi] = kernel_eval(model.kernel, model.X[lo:hi], model.X) @ coeffs
    margins = 1.0 - model.labels * decisions
    scale = model.sigma * model.nu
    if scale < SCALE_FLOOR:
        return float(np.sum(np.maximum(margins, 0.0)))
    z = margins / scale
    return float(np.sum(margins * _Phi_vec(z) + scale * _phi_vec(z)))


def train_ken_guru(
    data: Dataset, kernel: KernelSpec, sigma: float, cfg: TrainConfig
) -> KernelModel:
    """Kernelized SGD with the same schedule, sampling and stopping as train_guru.

    Returns the evaluated state with the lowest full objective (computed
    through the kernel expansion). With the linear kernel the returned
    decision function matches train_guru's for the same config.
    """
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    if data.kind != "binary":
        raise ValueError("binary trainer needs labels in {-1, +1}")
    model = _new_model(data, kernel, sigma)
    m = data.n_samples
    rng = np.random.default_rng(cfg.seed)
    tracker = _Tracker(cfg.epsilon)
    tracker.record(0, _kernel_objective(model), model.copy_state())
    for t in range(1, cfg.max_iters + 1):
        i = int(rng.integers(m))
        ken_guru_step(model, i, t, cfg.eta0)
        if t % cfg.eval_period == 0 or t == cfg.max_iters:
            if tracker.record(t, _kernel_objective(model), model.copy_state()):
                break
    alphas, scale, nu = tracker.best_snapshot
    model.alphas = alphas
    model.scale = scale
    model.nu = nu
    return model


def kernel_decision_values(model: KernelModel, X) -> np.ndarray:
    """Decision values sum_m alpha_m y^m k(x^m, x) for each row x of X."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.X.shape[1]:
        raise ValueError(f"dimension mismatch: expected {model.X.shape[1]}, got {X.shape[1]}")
    kvals = kernel_eval(model.kernel, X, model.X)
    return kvals @ (model.effective_alphas * model.labels)


def kernel_predict(model: KernelModel, x) -> float:
    """Decision value at a single point; its sign is the predicted label."""
    return float(kernel_decision_values(model, np.asarray(x, dtype=np.float64))[0])
