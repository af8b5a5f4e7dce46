"""Kolmogorov distances, Levy concentration and anti-concentration bounds.

All estimators are exact functionals of the empirical distributions.  The
99% Dvoretzky-Kiefer-Wolfowitz band ``sqrt(ln(2/0.01) / (2 n))`` with
``n = min(n_a, n_b)`` is the acceptance band everywhere.
"""
from dataclasses import dataclass
from math import log, pi, sqrt

import numpy as np

from .errors import DegenerateGrid, EmptyBatch, LengthMismatch, OutOfRange
from .limit import as_values

DKW_LEVEL = 0.01

# c_1 is exact for the Gaussian case (2 phi(0)).  c_2 and c_3 come from
# calibrate_cw_constant on 20000 wick samples (unit interval, k = 2 with
# alpha = 0.3, k = 3 with alpha = 0.2, seed 990001), rounded up to two
# decimals.  demos/04_concentration.py reruns the calibration.
CW_CONSTANTS = {1: sqrt(2.0 / pi), 2: 1.27, 3: 1.29}


@dataclass(frozen=True)
class DistanceReport:
    statistic: float
    n_a: int
    n_b: int
    dkw_band_99: float
    below_band: bool

    def to_dict(self):
        return {"statistic": self.statistic, "n_a": self.n_a, "n_b": self.n_b,
                "band": self.dkw_band_99, "below_band": self.below_band}


def dkw_band(n, level=DKW_LEVEL):
    return sqrt(log(2.0 / level) / (2.0 * n))


def _nonempty(x, name="batch"):
    x = as_values(x).ravel()
    if x.size == 0:
        raise EmptyBatch(f"{name} is empty")
    return x


def _sup_distance(a_sorted, b_sorted):
    # both ECDFs are right-continuous step functions that only jump at sample
    # points, so the supremum is attained on the merged sample
    z = np.concatenate([a_sorted, b_sorted])
    fa = np.searchsorted(a_sorted, z, side="right") / a_sorted.size
    fb = np.searchsorted(b_sorted, z, side="right") / b_sorted.size
    return float(np.max(np.abs(fa - fb)))


def kolmogorov_two_sample(a, b):
    a = np.sort(_nonempty(a, "a"))
    b = np.sort(_nonempty(b, "b"))
    stat = _sup_distance(a, b)
    band = dkw_band(min(a.size, b.size))
    return DistanceReport(stat, int(a.size), int(b.size), band, stat < band)


def kolmogorov_one_sample(x, cdf):
    """Sup distance between the ECDF of ``x`` and a continuous reference ``cdf``."""
    x = np.sort(_nonempty(x))
    n = x.size
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    stat = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    band = dkw_band(n)
    return DistanceReport(stat, n, n, band, stat < band)


def levy_concentration(samples, eps):
    """Empirical ``Q(eps) = sup_z #{z < x <= z + eps} / n``.

    Computed as the sup distance between the empirical laws of ``x + eps`` and
    ``x``; since ``F_x >= F_{x+eps}`` everywhere the two coincide exactly.
    """
    if eps < 0:
        raise OutOfRange("eps must be nonnegative")
    x = np.sort(_nonempty(samples))
    return _sup_distance(x + eps, x)


def carbery_wright_bound(kappa, eps_hat, t, kernel_norm_sq, c_kappa, variance_constant=1.0):
    """``c_k eps^(1/k) / (C ||K||^2 + t^2)^(1/(2k))``, a bound on ``P(|X_k - t| <= eps)``.

    ``variance_constant * kernel_norm_sq`` is the variance of ``X_k``; pass the
    variance itself with the default constant 1.  The exponent ``1/(2k)`` makes
    the bound invariant under rescaling ``X, eps, t`` by a common factor.
    """
    if kappa < 1 or eps_hat <= 0 or kernel_norm_sq <= 0 or c_kappa <= 0 or variance_constant <= 0:
        raise OutOfRange("kappa, eps_hat, kernel_norm_sq, c_kappa must be positive")
    denom = variance_constant * kernel_norm_sq + t * t
    return c_kappa * eps_hat ** (1.0 / kappa) / denom ** (1.0 / (2 * kappa))


def cw_calibration_grid(sd):
    """``(eps_hat, t)`` grids, in units of the standard deviation, used for calibration."""
    return sd * np.geomspace(0.005, 2.0, 30), sd * np.linspace(-0.5, 1.5, 81)


def calibrate_cw_constant(samples, kappa, variance, factor=1.5):
    """``factor`` times the largest ratio ``P(|X - t| <= eps) / bound(c = 1)`` on the calibration grid."""
    x = np.sort(_nonempty(samples))
    eps_grid, t_grid = cw_calibration_grid(sqrt(variance))
    best = 0.0
    for e in eps_grid:
        for t in t_grid:
            p = (np.searchsorted(x, t + e, side="right") - np.searchsorted(x, t - e, side="left")) / x.size
            best = max(best, p / carbery_wright_bound(kappa, e, t, variance, 1.0))
    return factor * best


def concentration_exponent(samples, eps_grid):
    """Least-squares slope of ``ln Q(eps)`` against ``ln eps``."""
    eps = np.asarray(eps_grid, dtype=float)
    if eps.size < 3 or np.any(eps <= 0) or eps.max() / eps.min() < 10 * (1 - 1e-12):
        raise DegenerateGrid("need at least 3 positive eps values spanning a decade")
    x = np.sort(_nonempty(samples))
    q = np.array([_sup_distance(x + e, x) for e in eps])
    if np.any(q <= 0):
        raise DegenerateGrid("empirical concentration vanishes on the grid")
    slope, _ = np.polyfit(np.log(eps), np.log(q), 1)
    return float(slope)


def tail_probability(y, eps):
    y = _nonempty(y)
    return float(np.mean(np.abs(y) >= eps))


def smoothing_terms(X, Y, Z, eps):
    """Both sides of the smoothing inequality and the 3-band slack."""
    x, y, z = as_values(X).ravel(), as_values(Y).ravel(), as_values(Z).ravel()
    if not (x.size == y.size == z.size):
        raise LengthMismatch("X, Y and Z must come from the same replicate pairing")
    if x.size == 0:
        raise EmptyBatch("empty batch")
    lhs = kolmogorov_two_sample(x + y, z).statistic
    rhs = (kolmogorov_two_sample(x, z).statistic + levy_concentration(z, eps)
           + tail_probability(y, eps))
    return lhs, rhs, 3 * dkw_band(x.size)


def smoothing_inequality_check(X, Y, Z, eps):
    """``rho(X+Y, Z) <= rho(X, Z) + Q_Z(eps) + P(|Y| >= eps)`` up to three DKW bands."""
    lhs, rhs, slack = smoothing_terms(X, Y, Z, eps)
    return bool(lhs <= rhs + slack)
