"""Integral functionals of a field over ``Delta(r)`` and their normalisation.

    K_r       = int_{Delta(r)} G(eta(x)) dx
    K_{r,k}   = C_k / k! int_{Delta(r)} H_k(eta(x)) dx
    X_{r,k}   = k! K_r / (C_k r^(d - k alpha / 2) L_cov(r)^(k/2))

Integrals are midpoint Riemann sums over the lattice cells whose centre lies
in ``Delta(r)``.  ``G`` is always centred (``C_0`` removed) first.
"""
from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import AlphaOutOfRange, RankZero
from .geometry import reduce_double_integral
from .hermite import hermite_eval


@dataclass(frozen=True)
class FunctionalResult:
    k_r: float
    k_r_kappa: float
    x_r_kappa: float
    r: float
    grid_spacing: float
    seed: int


def centered_expansion(expansion):
    """Centre ``expansion`` and check that the rank is at least 1."""
    exp_c = expansion.centered() if expansion.coefficients[0] != 0.0 or expansion.rank == 0 else expansion
    if exp_c.rank == 0:
        raise RankZero("G is constant up to the truncation order; Hermite rank 0 after centring")
    return exp_c


def check_alpha(model, kappa):
    if not 0 < model.alpha < model.d / kappa:
        raise AlphaOutOfRange(
            f"need 0 < alpha < d/kappa; got alpha={model.alpha}, d={model.d}, kappa={kappa}")


def normalization(model, r, kappa, c_kappa):
    """Divisor ``C_k r^(d - k alpha/2) L_cov(r)^(k/2) / k!`` turning ``K_r`` into ``X_{r,k}``."""
    L = float(model.L_cov(r))
    return c_kappa * r ** (model.d - kappa * model.alpha / 2) * L ** (kappa / 2) / factorial(kappa)


def riemann_functionals(values, G, h, d, c0, kappa, c_kappa):
    """Riemann sums of ``G - c0`` and of ``c_kappa / kappa! H_kappa``.

    ``values`` may hold one realization (1-D) or a batch (rows = replicates).
    Returns ``(k_r, k_r_kappa)`` with the shape of the leading axes.
    """
    values = np.asarray(values, dtype=float)
    cell = h**d
    g = np.asarray(G(values), dtype=float)
    if g.shape != values.shape:
        g = np.vectorize(G, otypes=[float])(values)
    k_r = cell * np.sum(g - c0, axis=-1)
    lead = c_kappa / factorial(kappa)
    k_rk = cell * lead * np.sum(hermite_eval(kappa, values), axis=-1)
    return k_r, k_rk


def integrate_functional(sample, G, expansion, model, h=None):
    """``FunctionalResult`` for one ``FieldSample``."""
    exp_c = centered_expansion(expansion)
    kappa = exp_c.rank
    check_alpha(model, kappa)
    h = sample.h if h is None else h
    c_k = exp_c.coefficients[kappa]
    k_r, k_rk = riemann_functionals(sample.values, G, h, model.d,
                                    expansion.coefficients[0], kappa, c_k)
    norm = normalization(model, sample.r, kappa, c_k)
    return FunctionalResult(float(k_r), float(k_rk), float(k_r / norm), sample.r, h, sample.seed)


def variance_k_r_kappa(model, w, r, kappa, C_kappa):
    """Exact ``Var K_{r,k} = C_k^2 / k! int int_{Delta(r)^2} B^k(|x - y|) dx dy``."""
    B = model.covariance
    dbl = reduce_double_integral(w, r, lambda z: float(B(z)) ** kappa)
    return C_kappa**2 / factorial(kappa) * dbl


def variance_x_r_kappa(model, w, r, kappa):
    """Exact variance of the normalised leading term ``k! K_{r,k} / (C_k r^... L^...)``."""
    v = variance_k_r_kappa(model, w, r, kappa, 1.0)
    return v / normalization(model, r, kappa, 1.0) ** 2


def riemann_variance_k_r_kappa(model, points, h, kappa, C_kappa):
    """Variance of the lattice Riemann sum of the leading term (no quadrature error)."""
    pts = np.asarray(points, dtype=float).reshape(len(points), -1)
    tot = 0.0
    for i in range(0, len(pts), 512):
        diff = pts[i:i + 512, None, :] - pts[None, :, :]
        tot += np.sum(model.covariance(np.sqrt(np.sum(diff * diff, axis=-1))) ** kappa)
    return C_kappa**2 / factorial(kappa) * h ** (2 * pts.shape[1]) * tot
