"""Observation windows, their indicator Fourier transforms and distance densities.

Windows are the unit ball (radius 1) and the unit cube (side 1, centred at the
origin).  The scaled window ``Delta(r) = r Delta`` is never built explicitly;
every function takes the scale ``r`` separately.
"""
from dataclasses import dataclass
from math import gamma, pi, sqrt

import numpy as np
from scipy import integrate, special

from .errors import NegativeDistance, OutOfRange, QuadratureFailure

KDE_PAIRS = 10**6


@dataclass(frozen=True)
class Window:
    shape: str
    d: int

    def __post_init__(self):
        if self.shape not in ("ball", "cube"):
            raise OutOfRange(f"unknown window shape {self.shape!r}")
        if self.d < 1:
            raise OutOfRange("dimension must be positive")

    @property
    def volume(self):
        return volume(self)

    @property
    def diameter(self):
        return 2.0 if self.shape == "ball" else sqrt(self.d)

    @property
    def half_extent(self):
        """Half side of the bounding box of the unit window."""
        return 1.0 if self.shape == "ball" else 0.5

    def contains(self, points, r=1.0):
        """Boolean mask of points (shape ``(n, d)``) lying in ``Delta(r)``."""
        p = np.asarray(points, dtype=float).reshape(-1, self.d)
        if self.shape == "ball":
            return np.sum(p * p, axis=1) <= r * r
        return np.all(np.abs(p) <= 0.5 * r, axis=1)

    def to_dict(self):
        return {"shape": self.shape, "d": self.d}


def ball(d):
    return Window("ball", d)


def cube(d):
    return Window("cube", d)


def volume(w):
    if w.shape == "cube":
        return 1.0
    return pi ** (w.d / 2) / gamma(w.d / 2 + 1)


def lattice(w, r, h):
    """Cell centres of the spacing-``h`` lattice that fall inside ``Delta(r)``.

    The lattice is symmetric about the origin: along each axis the centres are
    ``(i - (n - 1)/2) h`` with ``n = ceil(2 r e / h)`` where ``e`` is the half
    extent of the unit window.  Returns ``(points, axis, mask)``: the kept
    points, the per-axis coordinates of the bounding-box grid, and the mask
    over the flattened bounding-box grid.
    """
    n = int(np.ceil(2.0 * r * w.half_extent / h - 1e-9))
    axis = (np.arange(n) - (n - 1) / 2.0) * h
    mesh = np.meshgrid(*([axis] * w.d), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    mask = w.contains(pts, r)
    return pts[mask], axis, mask


def default_spacing(w, r, min_points=64):
    """Largest spacing giving at least ``min_points**d`` lattice points in ``Delta(r)``."""
    h = 2.0 * r * w.half_extent / min_points
    while lattice(w, r, h)[0].shape[0] < min_points**w.d:
        h *= 0.95
    return h


def indicator_ft(w, x):
    """``K_Delta(x) = int_Delta exp(i <x, u>) du`` (real by symmetry).

    For ``d == 1`` ``x`` is an array of frequencies of any shape; otherwise the
    last axis of ``x`` holds the ``d`` coordinates.
    """
    x = np.asarray(x, dtype=float)
    if w.d == 1:
        x = x[..., None]
    if w.shape == "cube":
        half = 0.5 * x
        return np.prod(np.sinc(half / pi), axis=-1)
    rho = np.sqrt(np.sum(x * x, axis=-1))
    nu = w.d / 2.0
    safe = np.where(rho > 0, rho, 1.0)
    val = (2 * pi) ** nu * special.jv(nu, safe) / safe**nu
    return np.where(rho > 0, val, volume(w))


def incomplete_beta(mu, p, q):
    """Regularised incomplete beta ``I_mu(p, q)``."""
    if not (0 < mu <= 1) or p <= 0 or q <= 0:
        raise OutOfRange("need 0 < mu <= 1 and p, q > 0")
    return float(special.betainc(p, q, mu))


def _square_distance_pdf(z):
    # density of |U - V| for U, V uniform on the unit square
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    a = (z >= 0) & (z <= 1)
    za = z[a]
    out[a] = 2 * za * (pi - 4 * za + za * za)
    b = (z > 1) & (z <= sqrt(2))
    zb = z[b]
    s = np.sqrt(zb * zb - 1)
    out[b] = 2 * zb * (4 * s - (zb * zb + 2 - pi) - 4 * np.arccos(1.0 / zb))
    return out


def _kde_cube_pdf(d, z, seed=12345):
    rng = np.random.default_rng(seed)
    dist = np.linalg.norm(rng.random((KDE_PAIRS, d)) - rng.random((KDE_PAIRS, d)), axis=1)
    bw = dist.std() * KDE_PAIRS ** (-1.0 / 5)  # Scott's rule
    # reflect at zero so the estimate keeps its mass on [0, inf)
    grid = np.asarray(z, dtype=float)
    dens = np.zeros_like(grid)
    chunk = 20000
    for i in range(0, KDE_PAIRS, chunk):
        dd = dist[i:i + chunk, None]
        dens += np.exp(-0.5 * ((grid - dd) / bw) ** 2).sum(axis=0)
        dens += np.exp(-0.5 * ((grid + dd) / bw) ** 2).sum(axis=0)
    return dens / (KDE_PAIRS * bw * sqrt(2 * pi))


def distance_density(w, r, z):
    """Density ``psi_{Delta(r)}(z)`` of the distance between two uniform points of ``Delta(r)``.

    Closed forms for balls (incomplete beta), the interval and the square;
    cubes in ``d >= 3`` fall back to a Gaussian kernel estimate from
    ``10**6`` Monte Carlo pairs with Scott's bandwidth.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise NegativeDistance("distance must be nonnegative")
    u = z / r
    if w.shape == "ball":
        d = w.d
        mu = np.clip(1.0 - (u / 2.0) ** 2, 0.0, 1.0)
        val = d * u ** (d - 1) * special.betainc((d + 1) / 2.0, 0.5, mu)
        val = np.where(u <= 2.0, val, 0.0)
    elif w.d == 1:
        val = np.where(u <= 1.0, 2.0 * (1.0 - u), 0.0)
    elif w.d == 2:
        val = _square_distance_pdf(u)
    else:
        val = np.where(u <= w.diameter, _kde_cube_pdf(w.d, np.atleast_1d(u)).reshape(u.shape), 0.0)
    val = val / r
    return val if val.ndim else float(val)


def _breakpoints(w):
    if w.shape == "cube" and w.d == 2:
        return [1.0]
    return []


def reduce_double_integral(w, r, upsilon, epsabs=1e-12, epsrel=1e-10):
    """``int int_{Delta(r)^2} Upsilon(|x - y|) dx dy`` via the distance density.

    Computed as ``|Delta|^2 r^{2d} int_0^diam Upsilon(z) psi(z) dz``; integrable
    singularities of ``Upsilon`` at 0 are handled by the adaptive rule.
    """
    diam = w.diameter * r
    scale = volume(w) ** 2 * r ** (2 * w.d)

    def integrand(z):
        return float(upsilon(z)) * float(distance_density(w, r, z))

    pts = [b * r for b in _breakpoints(w)]
    edges = [0.0] + pts + [diam]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(integrand, lo, hi, limit=400, epsabs=epsabs, epsrel=epsrel)
        if not np.isfinite(val) or abs(err) > max(1e-6 * abs(val), 1e-9):
            raise QuadratureFailure(f"distance-density integral did not converge (err={err:.2e})")
        total += val
    return scale * total


def riesz_constant(d, a, b):
    """``int_{R^d} |l|^{a-d} |s-l|^{b-d} dl = C |s|^{a+b-d}`` for ``a, b > 0``, ``a + b < d``."""
    if a <= 0 or b <= 0 or a + b >= d:
        raise OutOfRange("need a, b > 0 and a + b < d")
    g = special.gamma
    return pi ** (d / 2) * g(a / 2) * g(b / 2) * g((d - a - b) / 2) / (
        g((d - a) / 2) * g((d - b) / 2) * g((a + b) / 2))


def kernel_pair_integral(w, t1, t2, cutoff):
    """Truncated ``int int |K(l1 + l2)|^2 |l1|^(t1-1) |l2|^(t2-1)`` for ``d == 1``.

    The outer variable ``s = l1 + l2`` is truncated at ``|s| <= cutoff``; the
    inner convolution over ``l1`` is integrated numerically on the whole line.
    Used to probe finiteness when ``t1 + t2 < 1``.
    """
    if w.d != 1:
        raise OutOfRange("kernel_pair_integral is implemented for d = 1")

    def inner(s):
        f = lambda l: abs(l) ** (t1 - 1) * abs(s - l) ** (t2 - 1)
        a, b = min(0.0, s), max(0.0, s)
        tot = integrate.quad(f, -np.inf, a - 1.0, limit=200)[0]
        tot += integrate.quad(f, b + 1.0, np.inf, limit=200)[0]
        knots = [a - 1.0, a] + ([0.5 * (a + b), b] if b > a else []) + [b + 1.0]
        for lo, hi in zip(knots[:-1], knots[1:]):
            tot += integrate.quad(f, lo, hi, limit=200)[0]
        return tot

    def outer(s):
        return float(indicator_ft(w, s)) ** 2 * inner(s)

    # the integrand is even in s
    knots = np.concatenate([[1e-12], 2 * pi * np.arange(1, int(cutoff / (2 * pi)) + 1), [cutoff]])
    knots = np.unique(knots[knots <= cutoff])
    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        total += integrate.quad(outer, lo, hi, limit=100)[0]
    return 2.0 * total
