"""Scalar numerical primitives for the smooth robust-hinge machinery.

Everything in this package is built on the standard normal CDF

    Phi(t) = (1/sqrt(2*pi)) * integral_{-inf}^{t} exp(-z^2/2) dz

and the smooth hinge upper bound

    f(z) = z * Phi(z) + phi(z),     phi(z) = exp(-z^2/2) / sqrt(2*pi)

with derivative f'(z) = Phi(z) and curvature f''(z) = phi(z) > 0, so f is
strictly convex and satisfies max(z, 0) <= f(z) <= max(z, 0) + 1/sqrt(2*pi).

Two elementary plug-in losses share the same convexity structure and admit
closed-form Fenchel conjugates:

    log loss   l(z) = log2(1 + 2^z),        l*(a) = binary entropy H2(a)
    quad ramp  l(z) = 0 / (z+4)^2/16 / z,   l*(a) = 4a(1-a) on [0, 1]

All three losses satisfy l(z) >= z * l'(z), the condition needed for their
perspective scale*l(u/scale) to be jointly convex, and their conjugates are
concave and nonnegative on [0, 1].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

__all__ = [
    "SQRT_2PI",
    "ScalarLoss",
    "ConjugateDual",
    "gauss_cdf",
    "gauss_cdf_inv",
    "gauss_pdf",
    "smooth_hinge",
    "smooth_hinge_deriv",
    "smooth_hinge_second",
    "loss_value",
    "loss_derivative",
    "conjugate_value",
    "perspective",
]

SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)
_LN2 = math.log(2.0)

# Smallest representable steps used to clamp the CDF into the open interval
# (0, 1) so that gauss_cdf_inv is total on gauss_cdf outputs.
_CDF_LO = math.nextafter(0.0, 1.0)
_CDF_HI = math.nextafter(1.0, 0.0)


class ScalarLoss(enum.Enum):
    """Parameter-free scalar losses usable inside the perspective construction."""

    ERF = "erf"
    LOG = "log"
    QUAD = "quad"


def _cdf_raw(t: float) -> float:
    # May return exactly 0.0 or 1.0 in the far tails; the smooth hinge needs
    # that so f(z) never dips below max(z, 0) by a clamping artifact.
    return 0.5 * math.erfc(-t / _SQRT2)


def gauss_cdf(t: float) -> float:
    """Standard normal CDF, clamped into the open interval (0, 1)."""
    p = _cdf_raw(t)
    if p <= 0.0:
        return _CDF_LO
    if p >= 1.0:
        return _CDF_HI
    return p


def gauss_pdf(t: float) -> float:
    """Standard normal density exp(-t^2/2)/sqrt(2*pi)."""
    return math.exp(-0.5 * t * t) / SQRT_2PI


# Coefficients of Acklam's rational approximation to the inverse normal CDF
# (relative error < 1.15e-9 before refinement).
_ACK_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_ACK_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_ACK_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_ACK_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)
_ACK_P_LOW = 0.02425


def _acklam_lower(p: float) -> float:
    # Rational approximation for the lower half p <= 0.5 (x <= 0).
    if p < _ACK_P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (
            ((((_ACK_C[0] * q + _ACK_C[1]) * q + _ACK_C[2]) * q + _ACK_C[3]) * q + _ACK_C[4]) * q
            + _ACK_C[5]
        ) / ((((_ACK_D[0] * q + _ACK_D[1]) * q + _ACK_D[2]) * q + _ACK_D[3]) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (
        (((((_ACK_A[0] * r + _ACK_A[1]) * r + _ACK_A[2]) * r + _ACK_A[3]) * r + _ACK_A[4]) * r + _ACK_A[5])
        * q
        / (((((_ACK_B[0] * r + _ACK_B[1]) * r + _ACK_B[2]) * r + _ACK_B[3]) * r + _ACK_B[4]) * r + 1.0)
    )


def gauss_cdf_inv(p: float) -> float:
    """Inverse of the standard normal CDF on the open interval (0, 1).

    Acklam's rational approximation refined by one Newton step. The
    refinement is done on the nearer tail (where erfc carries full relative
    precision, avoiding 1 - p cancellation), so the result is odd about
    p = 0.5 by construction and accurate to well below 1e-10.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"gauss_cdf_inv requires 0 < p < 1, got {p!r}")
    if p == 0.5:
        return 0.0
    tail = p if p < 0.5 else 1.0 - p  # exact: p in (0.5, 1) makes 1 - p exact
    x = _acklam_lower(tail)
    # Newton step against the lower-tail CDF; skipped deep in the tail where
    # the density underflows and the rational approximation stands alone.
    if x > -37.0:
        x -= (_cdf_raw(x) - tail) / gauss_pdf(x)
    return x if p < 0.5 else -x


def smooth_hinge(z: float) -> float:
    """The smooth strictly-convex upper bound of max(z, 0)."""
    if z > 0.0:
        # z + (phi(z) - z*tail(z)): the Mills margin keeps full relative
        # precision through erfc, so the value never dips below z.
        tail = 0.5 * math.erfc(z / _SQRT2)
        return z + (gauss_pdf(z) - z * tail)
    val = z * _cdf_raw(z) + gauss_pdf(z)
    # Deep in the left tail both terms are subnormal and their cancellation
    # can turn (mathematically positive) dust negative.
    return max(val, 0.0)


def smooth_hinge_deriv(z: float) -> float:
    """First derivative of the smooth hinge; identical code path to gauss_cdf."""
    return gauss_cdf(z)


def smooth_hinge_second(z: float) -> float:
    """Second derivative of the smooth hinge, the normal density (always > 0)."""
    return gauss_pdf(z)


def loss_value(loss: ScalarLoss, z: float) -> float:
    """Evaluate one of the scalar losses at z."""
    if loss is ScalarLoss.ERF:
        return smooth_hinge(z)
    if loss is ScalarLoss.LOG:
        # log2(1 + 2^z), computed without overflow on either side.
        if z >= 0.0:
            return z + math.log1p(math.exp(-z * _LN2)) / _LN2
        return math.log1p(math.exp(z * _LN2)) / _LN2
    if loss is ScalarLoss.QUAD:
        if z < -4.0:
            return 0.0
        if z <= 4.0:
            t = z + 4.0
            return t * t / 16.0
        return z
    raise TypeError(f"unknown loss {loss!r}")


def loss_derivative(loss: ScalarLoss, z: float) -> float:
    """Derivative of loss_value; continuous everywhere for all three losses."""
    if loss is ScalarLoss.ERF:
        return smooth_hinge_deriv(z)
    if loss is ScalarLoss.LOG:
        if z >= 0.0:
            return 1.0 / (1.0 + math.exp(-z * _LN2))
        t = math.exp(z * _LN2)
        return t / (1.0 + t)
    if loss is ScalarLoss.QUAD:
        if z < -4.0:
            return 0.0
        if z <= 4.0:
            return (z + 4.0) / 8.0
        return 1.0
    raise TypeError(f"unknown loss {loss!r}")


def conjugate_value(loss: ScalarLoss, alpha: float) -> float:
    """Fenchel conjugate inf_z [loss(z) - alpha*z] of a scalar loss.

    The domain is the open interval (0, 1) for ERF and LOG (the infimum is
    not attained at the endpoints) and the closed interval [0, 1] for QUAD;
    outside it the conjugate is -inf, reported as a domain error.
    """
    if loss is ScalarLoss.ERF:
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"conjugate of the smooth hinge requires 0 < alpha < 1, got {alpha!r}")
        return gauss_pdf(gauss_cdf_inv(alpha))
    if loss is ScalarLoss.LOG:
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"conjugate of the log loss requires 0 < alpha < 1, got {alpha!r}")
        return -alpha * math.log2(alpha) - (1.0 - alpha) * math.log2(1.0 - alpha)
    if loss is ScalarLoss.QUAD:
        if not 0.0 <= alpha <= 1.0:
            raise ValueError(f"conjugate of the quad ramp requires 0 <= alpha <= 1, got {alpha!r}")
        return 4.0 * alpha * (1.0 - alpha)
    raise TypeError(f"unknown loss {loss!r}")


@dataclass(frozen=True)
class ConjugateDual:
    """Conjugate of a scalar loss together with its usable domain."""

    loss: ScalarLoss
    domain_upper: float = 1.0

    @property
    def closed_at_ends(self) -> bool:
        return self.loss is ScalarLoss.QUAD

    def value(self, alpha: float) -> float:
        return conjugate_value(self.loss, alpha)

    __call__ = value


def perspective(loss: ScalarLoss, scale: float, u: float) -> float:
    """Perspective transform scale * loss(u / scale), jointly convex in (scale, u).

    Requires scale > 0; callers own the scale -> 0 hinge limit.
    """
    if not scale > 0.0:
        raise ValueError(f"perspective requires scale > 0, got {scale!r}")
    return scale * loss_value(loss, u / scale)
