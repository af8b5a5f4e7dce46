"""Probabilists' Hermite polynomials and Hermite expansions.

The expansion of a function ``G`` in ``L2(R, phi)`` with the standard normal
density ``phi`` reads ``G(w) = sum_j C_j H_j(w) / j!`` where
``C_j = int G(w) H_j(w) phi(w) dw``.  Coefficients are computed with
Gauss-Hermite quadrature.
"""
from dataclasses import dataclass, replace
from functools import lru_cache
from math import factorial, sqrt

import numpy as np

from .errors import LengthMismatch, NonFiniteQuadrature, OutOfRange, RankUndetected

DEFAULT_QUAD_ORDER = 128
RANK_TOL = 1e-9


def hermite_eval(k, x):
    """Evaluate ``H_k(x)`` by the three-term recurrence.

    ``x`` may be a scalar or an array; the result has the same shape.
    """
    if k < 0:
        raise OutOfRange(f"Hermite degree must be nonnegative, got {k}")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if k == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for j in range(1, k):
        h_prev, h = h, x * h - j * h_prev
    return h if h.ndim else float(h)


def hermite_table(J, x):
    """Rows ``H_0(x) .. H_J(x)`` stacked into a ``(J + 1, len(x))`` array."""
    x = np.asarray(x, dtype=float)
    out = np.empty((J + 1,) + x.shape)
    out[0] = 1.0
    if J >= 1:
        out[1] = x
    for j in range(1, J):
        out[j + 1] = x * out[j] - j * out[j - 1]
    return out


@lru_cache(maxsize=16)
def gauss_hermite_normal(order):
    """Nodes and weights integrating against the standard normal density.

    Physicists' Gauss-Hermite rule (weight ``exp(-x^2)``) with the change of
    variable ``w = sqrt(2) x``; weights are divided by ``sqrt(pi)``.
    """
    x, wts = np.polynomial.hermite.hermgauss(order)
    nodes = np.sqrt(2.0) * x
    weights = wts / np.sqrt(np.pi)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _rank_tolerance(j, l2_norm_sq):
    return RANK_TOL * max(1.0, sqrt(max(l2_norm_sq, 0.0) * factorial(j)))


def detect_rank(coefficients, l2_norm_sq, start=0):
    """Index of the first coefficient at or after ``start`` above tolerance, else None."""
    for j in range(start, len(coefficients)):
        if abs(coefficients[j]) > _rank_tolerance(j, l2_norm_sq):
            return j
    return None


@dataclass(frozen=True)
class HermiteExpansion:
    """Truncated Hermite expansion ``G ~ sum_{j<=J} C_j H_j / j!``."""

    coefficients: tuple
    rank: int
    truncation_order: int
    quadrature_order: int
    l2_norm_sq: float

    @property
    def c_kappa(self):
        return self.coefficients[self.rank]

    def parseval_partial(self, J=None):
        """``sum_{j<=J} C_j^2 / j!``."""
        J = self.truncation_order if J is None else J
        return sum(c * c / factorial(j) for j, c in enumerate(self.coefficients[: J + 1]))

    def centered(self):
        """Expansion of ``G - C_0``; the rank is recomputed over ``j >= 1``.

        ``rank`` is set to 0 when no coefficient beyond ``C_0`` survives, which
        callers treat as a degenerate (constant) functional.
        """
        c0 = self.coefficients[0]
        coeffs = (0.0,) + tuple(self.coefficients[1:])
        l2 = self.l2_norm_sq - c0 * c0
        rank = detect_rank(coeffs, l2, start=1)
        return replace(self, coefficients=coeffs, l2_norm_sq=l2, rank=0 if rank is None else rank)

    def evaluate(self, w):
        """Evaluate the truncated series at ``w``."""
        w = np.asarray(w, dtype=float)
        table = hermite_table(self.truncation_order, w)
        scale = np.array([c / factorial(j) for j, c in enumerate(self.coefficients)])
        return np.tensordot(scale, table, axes=1)


def _apply(G, nodes):
    try:
        vals = np.asarray(G(nodes), dtype=float)
        if vals.shape != nodes.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([float(G(t)) for t in nodes])
    return vals


def expand(G, J, quad_order=DEFAULT_QUAD_ORDER):
    """Hermite coefficients ``C_0..C_J`` of ``G`` and its Hermite rank.

    Parameters
    ----------
    G : callable
        Square integrable against the standard normal density.  Vectorised
        callables are used directly; scalar ones are mapped over the nodes.
    J : int
        Truncation order.
    quad_order : int
        Number of Gauss-Hermite nodes, at least ``2 J``.

    Raises
    ------
    NonFiniteQuadrature
        ``G`` returned a non-finite value at a node.
    RankUndetected
        Every coefficient up to ``J`` is below the rank tolerance.
    """
    if J < 0:
        raise OutOfRange("truncation order must be nonnegative")
    if quad_order < max(2 * J, 2):
        raise OutOfRange(f"quad_order={quad_order} must be at least 2*J={2 * J}")
    nodes, weights = gauss_hermite_normal(int(quad_order))
    vals = _apply(G, nodes)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteQuadrature("G is not finite at every quadrature node")
    table = hermite_table(J, nodes)
    coeffs = table @ (weights * vals)
    l2 = float(np.sum(weights * vals * vals))
    rank = detect_rank(coeffs, l2)
    if rank is None:
        raise RankUndetected(f"all Hermite coefficients up to J={J} vanish")
    return HermiteExpansion(
        coefficients=tuple(float(c) for c in coeffs),
        rank=rank,
        truncation_order=J,
        quadrature_order=int(quad_order),
        l2_norm_sq=l2,
    )


def product_moment(k, m, r):
    """``E prod_j H_{k_j}(xi_j) H_{m_j}(xi_{j+p})`` for pairwise correlated normals.

    Each pair ``(xi_j, xi_{j+p})`` has correlation ``r_j``; distinct pairs are
    independent.  The value is ``prod_j delta(k_j, m_j) k_j! r_j^{k_j}``.
    """
    if not (len(k) == len(m) == len(r)):
        raise LengthMismatch("k, m and r must have the same length")
    out = 1.0
    for kj, mj, rj in zip(k, m, r):
        if kj != mj:
            return 0.0
        out *= factorial(kj) * rj**kj
    return out
