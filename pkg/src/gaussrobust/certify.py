"""Dual certificates: an independent correctness check for trained models.

For a stationary weight vector w of the robust objective, setting

    alpha_m = Phi((1 - y^m w.x^m) / (sigma*||w||))

produces a feasible point of the dual problem

    max sum_m alpha_m   s.t.   ||sum_m alpha_m y^m x^m|| <= sigma * sum_m f*(alpha_m)

with f*(a) = phi(Phi^{-1}(a)), and three identities hold at stationarity:
the constraint is tight, the duality gap sum(alpha) - primal vanishes, and
the primal norm can be reconstructed per sample as

    ||w|| = 1 / (sigma * Phi^{-1}(alpha_m) + y^m u.x^m)

where u is the unit direction recovered from the dual side,
u = normalize(sum_m alpha_m y^m x^m). Far from stationarity the dual and
primal directions disagree, so the per-sample norm estimates spread out and
the gap grows; both are reported rather than asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .linear import robust_objective, robust_objective_gradient
from .robust import LinearModel
from .scalars import ScalarLoss, conjugate_value, gauss_cdf, gauss_cdf_inv

__all__ = [
    "DualCertificate",
    "NormRestoration",
    "ConstraintShapeReport",
    "build_certificate",
    "restore_norm",
    "check_constraint_shapes",
    "ALPHA_CLAMP",
]

# Margins far from the boundary give alpha numerically 0 or 1; such entries
# are clamped into (ALPHA_CLAMP, 1 - ALPHA_CLAMP) and flagged.
ALPHA_CLAMP = 1e-15


@dataclass(frozen=True)
class NormRestoration:
    """Per-sample primal-norm estimates plus their validity mask."""

    estimates: np.ndarray
    valid: np.ndarray


@dataclass(frozen=True)
class DualCertificate:
    """Dual variables and the three stationarity diagnostics.

    feasible/tight_rel report the dual constraint ||sum alpha y x|| vs
    sigma*sum f*(alpha); gap_rel compares sum(alpha) against the primal
    objective; norm_estimates reconstruct ||w|| per sample. grad_norm is the
    full-objective gradient norm at the certified model (the certificate is
    only meaningful when it is tiny).
    """

    alphas: np.ndarray
    clamped: np.ndarray
    dual_objective: float
    primal_objective: float
    gap_rel: float
    constraint_lhs: float
    constraint_rhs: float
    tight_rel: float
    feasible: bool
    norm_estimates: np.ndarray
    estimate_valid: np.ndarray
    grad_norm: float
    w_norm: float
    sigma: float


def _model_alphas(data: Dataset, model: LinearModel) -> tuple[np.ndarray, np.ndarray]:
    X, y = data.X, data.y.astype(np.float64)
    nw = model.norm
    if nw == 0.0:
        raise ValueError("certificate undefined at w = 0")
    margins = 1.0 - y * (X @ model.w)
    if not np.all(np.isfinite(margins)):
        raise ValueError("non-finite margins")
    z = margins / (model.sigma * nw)
    alphas = np.array([gauss_cdf(float(v)) for v in z])
    clamped = (alphas < ALPHA_CLAMP) | (alphas > 1.0 - ALPHA_CLAMP)
    alphas = np.clip(alphas, ALPHA_CLAMP, 1.0 - ALPHA_CLAMP)
    return alphas, clamped


def restore_norm(data: Dataset, model: LinearModel) -> NormRestoration:
    """Reconstruct ||w|| from each sample's dual variable.

    The unit direction in the denominator comes from the dual side
    (normalize(sum alpha y x)); at stationarity it coincides with w/||w||
    and every estimate equals ||w||, away from it the estimates spread,
    which is what gives the check diagnostic power. Nonpositive denominators
    are flagged invalid and excluded from agreement statistics.
    """
    alphas, _ = _model_alphas(data, model)
    X, y = data.X, data.y.astype(np.float64)
    combo = X.T @ (alphas * y)
    combo_norm = float(np.linalg.norm(combo))
    if combo_norm == 0.0:
        raise ValueError("dual combination vanished; no direction to restore from")
    u = combo / combo_norm
    inv = np.array([gauss_cdf_inv(float(a)) for a in alphas])
    denom = model.sigma * inv + y * (X @ u)
    valid = denom > 0.0
    estimates = np.full(len(denom), np.nan)
    estimates[valid] = 1.0 / denom[valid]
    return NormRestoration(estimates=estimates, valid=valid)


def build_certificate(data: Dataset, model: LinearModel) -> DualCertificate:
    """Assemble the dual certificate for a (near-)stationary binary model.

    Gate on grad_norm before trusting the diagnostics: the duality results
    hold at the optimum, and the reported gap/tightness degrade smoothly
    with the residual gradient.
    """
    if data.kind != "binary":
        raise ValueError("certification supports binary data only")
    X, y = data.X, data.y.astype(np.float64)
    alphas, clamped = _model_alphas(data, model)
    dual_obj = float(np.sum(alphas))
    primal_obj = robust_objective(X, y, model.w, model.sigma)
    gap_rel = abs(dual_obj - primal_obj) / max(1.0, primal_obj)
    combo = X.T @ (alphas * y)
    lhs = float(np.linalg.norm(combo))
    rhs = model.sigma * float(
        np.sum([conjugate_value(ScalarLoss.ERF, float(a)) for a in alphas])
    )
    tight_rel = abs(lhs - rhs) / rhs if rhs > 0.0 else math.inf
    restoration = restore_norm(data, model)
    grad_norm = float(np.linalg.norm(robust_objective_gradient(X, y, model.w, model.sigma)))
    return DualCertificate(
        alphas=alphas,
        clamped=clamped,
        dual_objective=dual_obj,
        primal_objective=primal_obj,
        gap_rel=gap_rel,
        constraint_lhs=lhs,
        constraint_rhs=rhs,
        tight_rel=tight_rel,
        feasible=lhs <= rhs * (1.0 + 1e-9) + 1e-12,
        norm_estimates=restoration.estimates,
        estimate_valid=restoration.valid,
        grad_norm=grad_norm,
        w_norm=model.norm,
        sigma=model.sigma,
    )


@dataclass(frozen=True)
class ConstraintShapeReport:
    """The dual budget function and its two elementary approximations.

    Per alpha: the exact per-sample budget phi(Phi^{-1}(alpha)), the binary
    entropy H2(alpha) and the parabola 4*alpha*(1-alpha). All three vanish
    at the interval ends, peak at alpha = 1/2 and are symmetric about it.
    """

    alphas: np.ndarray
    erf_budget: np.ndarray
    entropy_budget: np.ndarray
    quad_budget: np.ndarray
    max_pairwise_deviation: float

    def rows(self):
        for i in range(len(self.alphas)):
            yield (
                float(self.alphas[i]),
                float(self.erf_budget[i]),
                float(self.entropy_budget[i]),
                float(self.quad_budget[i]),
            )


def check_constraint_shapes(alphas) -> ConstraintShapeReport:
    """Evaluate all three budget shapes on the given dual variables."""
    alphas = np.asarray(alphas, dtype=np.float64)
    if np.any((alphas <= 0.0) | (alphas >= 1.0)):
        raise ValueError("alphas must lie strictly inside (0, 1)")
    erf_b = np.array([conjugate_value(ScalarLoss.ERF, float(a)) for a in alphas])
    ent_b = np.array([conjugate_value(ScalarLoss.LOG, float(a)) for a in alphas])
    quad_b = np.array([conjugate_value(ScalarLoss.QUAD, float(a)) for a in alphas])
    stacked = np.stack([erf_b, ent_b, quad_b])
    max_dev = float(np.max(np.abs(stacked[:, None, :] - stacked[None, :, :])))
    return ConstraintShapeReport(
        alphas=alphas,
        erf_budget=erf_b,
        entropy_budget=ent_b,
        quad_budget=quad_b,
        max_pairwise_deviation=max_dev,
    )
