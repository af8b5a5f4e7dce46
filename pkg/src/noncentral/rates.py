"""Rate exponents for the Kolmogorov distance to the limit law.

For ``tau < 0`` the distance is ``o(r^-x)`` for every ``x`` below

    a / (2 + a) * min(alpha (d - k alpha) / (d - (k - 1) alpha), kappa1),
    kappa1 = min(-2 tau, 1 / (sum_{j=2..k} 1/(d - j alpha) + 1/(d + 1 - k alpha))),

and for ``tau = 0`` the rate is ``g(r)^(2/3)``.
"""
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateGrid, NonPositiveInput, NonPositiveValue, OutOfRange, TauTooNegative

TAU_ZERO_G_POWER = 2.0 / 3.0


@dataclass(frozen=True)
class RateBound:
    branch: str
    kappa1: Optional[float]
    alpha_term: float
    sup_exponent: Optional[float]
    g_power: Optional[float]
    d: int
    alpha: float
    kappa: int
    tau: float
    a: float

    def to_dict(self):
        return asdict(self)


def default_a(kappa):
    """Concentration exponent: 1 for bounded densities (k <= 2), 1/k otherwise."""
    return 1.0 if kappa <= 2 else 1.0 / kappa


def _check_alpha(d, alpha, kappa):
    if d < 1 or kappa < 1:
        raise OutOfRange("d and kappa must be positive")
    if not 0 < alpha < d / kappa:
        raise OutOfRange(f"need 0 < alpha < d/kappa, got alpha={alpha}")


def harmonic_term(d, alpha, kappa):
    """``1 / (sum_{j=2..k} 1/(d - j alpha) + 1/(d + 1 - k alpha))``; empty sum for ``k = 1``."""
    s = sum(1.0 / (d - j * alpha) for j in range(2, kappa + 1))
    return 1.0 / (s + 1.0 / (d + 1 - kappa * alpha))


def kappa1(d, alpha, kappa, tau):
    _check_alpha(d, alpha, kappa)
    if tau >= 0:
        raise OutOfRange("kappa1 needs tau < 0")
    return min(-2.0 * tau, harmonic_term(d, alpha, kappa))


def alpha_term(d, alpha, kappa):
    return alpha * (d - kappa * alpha) / (d - (kappa - 1) * alpha)


def rate_bound(d, alpha, kappa, tau, a=None, clamp_tau=False):
    """Exponents of the Kolmogorov-distance rate.

    With ``clamp_tau`` a ``tau`` at or below ``-(d - k alpha)/2`` is replaced
    by ``effective_tau`` instead of raising ``TauTooNegative``; the recorded
    ``tau`` is then the clamped value.
    """
    _check_alpha(d, alpha, kappa)
    if clamp_tau:
        tau = effective_tau(d, alpha, kappa, tau)
    a = default_a(kappa) if a is None else a
    if not 0 < a <= 1:
        raise OutOfRange("a must lie in (0, 1]")
    if tau > 0:
        raise OutOfRange("tau must be <= 0")
    if tau <= -(d - kappa * alpha) / 2:
        raise TauTooNegative(f"tau={tau} <= -(d - kappa alpha)/2 = {-(d - kappa * alpha) / 2}")
    at = alpha_term(d, alpha, kappa)
    if tau == 0:
        return RateBound("tau_zero", None, at, None, TAU_ZERO_G_POWER, d, alpha, kappa, tau, a)
    k1 = kappa1(d, alpha, kappa, tau)
    sup = a / (2 + a) * min(at, k1)
    return RateBound("tau_negative", k1, at, sup, None, d, alpha, kappa, tau, a)


def effective_tau(d, alpha, kappa, tau, margin=1e-9):
    """Clamp ``tau`` into ``(-(d - k alpha)/2, 0]``.

    A remainder of index ``tau`` also satisfies the condition for every larger
    index, so a model with a more negative ``tau`` may use the boundary value.
    """
    lo = -(d - kappa * alpha) / 2
    return max(tau, lo + margin) if tau < 0 else tau


def optimal_partition(b, x):
    """Maximise ``min_i (g_i - g_{i+1}) x_i`` over partitions of ``b``.

    The maximiser equalises the products: ``g_i - g_{i+1} = b (1/x_i) / sum 1/x_j``
    and the maximum is ``b / sum 1/x_j``.
    """
    x = np.asarray(x, dtype=float)
    if b <= 0 or x.size == 0 or np.any(x <= 0):
        raise NonPositiveInput("b and all x_i must be positive")
    inv = 1.0 / x
    diffs = b * inv / inv.sum()
    return diffs, float(b / inv.sum())


def fit_rate(r_values, rho_values):
    """OLS of ``ln rho`` on ``ln r``; returns ``(slope, intercept, residual)``.

    ``residual`` is the root mean square of the fit residuals.
    """
    r = np.asarray(r_values, dtype=float)
    rho = np.asarray(rho_values, dtype=float)
    if r.size != rho.size or r.size < 3 or np.unique(r).size < 2:
        raise DegenerateGrid("need at least 3 paired points with distinct r")
    if np.any(r <= 0) or np.any(rho <= 0):
        raise NonPositiveValue("r and rho must be positive")
    lx, ly = np.log(r), np.log(rho)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return float(slope), float(intercept), float(np.sqrt(np.mean(resid**2)))
