"""Isotropic covariance models and Gaussian field simulation.

A ``FieldModel`` bundles the covariance ``B(r)`` of a unit-variance isotropic
field with its spectral density ``f(|lambda|)`` (when known in closed form) and
the two slowly varying factors

    B(r) = r^-alpha L_cov(r),    f(u) = c2(d, alpha) u^(alpha - d) L_spec(1/u).

Two simulators are provided: exact circulant embedding on a lattice
(``d <= 2``) and the randomization (spectral sampling) method at arbitrary
points.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma, pi
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special
from scipy.interpolate import PchipInterpolator

from . import varying
from .errors import (
    EmbeddingNotPSD,
    OutOfRange,
    QuadratureFailure,
    RadialCdfTabulationFailure,
)
from .geometry import cube, lattice
from .seeding import make_rng

PSD_TOL = 1e-6
MAX_DOUBLINGS = 4
RADIAL_NODES = 4096


def c2(d, alpha):
    """Spectral constant ``Gamma((d - a)/2) / (2^a pi^(d/2) Gamma(a/2))``."""
    if not 0 < alpha < d:
        raise OutOfRange(f"c2 needs 0 < alpha < d, got alpha={alpha}, d={d}")
    return gamma((d - alpha) / 2) / (2**alpha * pi ** (d / 2) * gamma(alpha / 2))


def bessel_kernel_Yd(d, z):
    """``2^((d-2)/2) Gamma(d/2) J_{(d-2)/2}(z) z^((2-d)/2)``, equal to 1 at ``z = 0``."""
    z = np.asarray(z, dtype=float)
    nu = (d - 2) / 2.0
    safe = np.where(z > 0, z, 1.0)
    val = 2.0**nu * gamma(d / 2.0) * special.jv(nu, safe) / safe**nu
    out = np.where(z > 0, val, 1.0)
    return out if out.ndim else float(out)


def sphere_area(d):
    """Surface area ``2 pi^(d/2) / Gamma(d/2)`` of the unit sphere in ``R^d``."""
    return 2 * pi ** (d / 2) / gamma(d / 2)


@dataclass(frozen=True, eq=False)
class FieldModel:
    d: int
    alpha: float
    L_cov: varying.SlowlyVarying
    L_spec: Optional[varying.SlowlyVarying]
    covariance: Callable
    spectral_density: Optional[Callable]
    name: str
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "d": self.d, "alpha": self.alpha, **self.params}


def cauchy_model(d=1, theta=1.0, sigma=2.0):
    """Cauchy (``sigma = 2``) and Linnik-type covariance ``(1 + r^sigma)^-theta``.

    ``alpha = sigma theta``.  The spectral density is only available in closed
    form for ``sigma = 2``:

        f(u) = 2^(1 - theta) / ((2 pi)^(d/2) Gamma(theta)) u^(theta - d/2) K_{d/2 - theta}(u).
    """
    if not 0 < sigma <= 2 or theta <= 0:
        raise OutOfRange("need 0 < sigma <= 2 and theta > 0")
    alpha = sigma * theta

    def cov(r):
        r = np.abs(np.asarray(r, dtype=float))
        return (1.0 + r**sigma) ** (-theta)

    L_cov = varying.custom(
        lambda r: (1.0 + np.asarray(r, dtype=float) ** (-sigma)) ** (-theta),
        tau=-sigma,
        remainder_g=lambda r: np.asarray(r, dtype=float) ** (-sigma),
        description=f"(1 + r^-{sigma})^-{theta}",
        limit=1.0,
    )
    density = None  # closed form only for sigma = 2
    L_spec = None
    if sigma == 2.0:
        nu = d / 2.0 - theta
        pref = 2.0 ** (1 - theta) / ((2 * pi) ** (d / 2) * gamma(theta))

        def kv_density(u):
            u = np.asarray(u, dtype=float)
            with np.errstate(over="ignore", invalid="ignore"):
                out = pref * u ** (theta - d / 2.0) * special.kv(nu, u)
            return out

        density = kv_density

        if alpha < d:
            cc = c2(d, alpha)
            tau = -min(2.0, d - alpha)
            L_spec = varying.custom(
                lambda r: density(1.0 / np.asarray(r, dtype=float)) / (cc * np.asarray(r, dtype=float) ** (d - alpha)),
                tau=tau,
                remainder_g=lambda r, t=tau: np.asarray(r, dtype=float) ** t,
                description="exact Cauchy spectral factor",
                limit=1.0,
            )
    name = "cauchy" if sigma == 2.0 else "linnik"
    return FieldModel(d, alpha, L_cov, L_spec, cov, density, name,
                      {"theta": theta, "sigma": sigma})


def linnik_model(d=1, theta=0.5, sigma=1.0):
    return cauchy_model(d, theta, sigma)


def default_taper(d, alpha):
    """Taper radius ``U`` for which ``L_cov(r) -> 1``."""
    return 2.0 * (gamma(d / 2) / gamma((d - alpha) / 2)) ** (1.0 / alpha)


def power_law_model(d=1, alpha=0.5, taper=None):
    """Spectral density ``A u^(alpha - d) exp(-(u/U)^2)`` normalised so that ``B(0) = 1``.

    The covariance is ``1F1(alpha/2; d/2; -(r U / 2)^2)``.  With the default
    ``U`` both slowly varying factors tend to 1; their remainder is of order
    ``r^-2``.
    """
    if not 0 < alpha < d:
        raise OutOfRange("power-law model needs 0 < alpha < d")
    U = default_taper(d, alpha) if taper is None else float(taper)
    A = gamma(d / 2) / (pi ** (d / 2) * U**alpha * gamma(alpha / 2))
    cc = c2(d, alpha)
    lim = gamma(d / 2) / gamma((d - alpha) / 2) * (2.0 / U) ** alpha

    def cov(r):
        r = np.abs(np.asarray(r, dtype=float))
        return special.hyp1f1(alpha / 2, d / 2, -((r * U / 2) ** 2))

    def spec(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return A * u ** (alpha - d) * np.exp(-((u / U) ** 2))

    r_inv2 = lambda r: np.asarray(r, dtype=float) ** -2.0
    L_cov = varying.custom(lambda r: np.asarray(r, dtype=float) ** alpha * cov(r),
                           tau=-2.0, remainder_g=r_inv2,
                           description="r^alpha 1F1(alpha/2; d/2; -(rU/2)^2)", limit=lim)
    L_spec = varying.custom(lambda r: (A / cc) * np.exp(-1.0 / (np.asarray(r, dtype=float) * U) ** 2),
                            tau=-2.0, remainder_g=r_inv2,
                            description="(A/c2) exp(-1/(rU)^2)", limit=A / cc)
    return FieldModel(d, alpha, L_cov, L_spec, cov, spec, "power_law",
                      {"taper": U})


def spectral_mass(model):
    """``|S^{d-1}| int_0^inf u^{d-1} f(u) du``; equals ``B(0) = 1`` for a valid model."""
    f = model.spectral_density
    d = model.d
    g = lambda u: u ** (d - 1) * float(f(u))
    total = 0.0
    for lo, hi in ((0.0, 1.0), (1.0, 10.0), (10.0, np.inf)):
        total += integrate.quad(g, lo, hi, limit=400, epsabs=1e-13, epsrel=1e-11)[0]
    return sphere_area(d) * total


def _tail_cutoff(model, rel=1e-16):
    f, d = model.spectral_density, model.d
    ref = max(float(f(1.0)), 1e-300)
    u = 1.0
    while u ** (d - 1) * float(f(u)) * u > rel * ref and u < 1e6:
        u *= 1.5
    return u


def hankel_transform(model, r):
    """``|S^{d-1}| int_0^inf Y_d(r z) z^(d-1) f(z) dz`` evaluated numerically."""
    f, d = model.spectral_density, model.d
    if r == 0:
        return spectral_mass(model)
    g = lambda z: z ** (d - 1) * float(f(z))
    if d == 1:
        head, e1 = integrate.quad(lambda z: g(z) * np.cos(r * z), 0.0, 1.0, limit=400,
                                  epsabs=1e-13)
        tail, e2 = integrate.quad(g, 1.0, np.inf, weight="cos", wvar=r, limit=400,
                                  epsabs=1e-13)
        val, err = head + tail, e1 + e2
    else:
        top = _tail_cutoff(model)
        step = pi / r
        edges = np.concatenate([[0.0, min(1.0, step)], np.arange(min(1.0, step) + step, top, step), [top]])
        edges = np.unique(edges)
        val = err = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            v, e = integrate.quad(lambda z: g(z) * bessel_kernel_Yd(d, r * z), lo, hi, limit=200)
            val += v
            err += e
    if not np.isfinite(val) or err > 1e-6:
        raise QuadratureFailure(f"Hankel integral at r={r} did not converge (err={err:.2e})")
    return sphere_area(d) * val


def hankel_consistency(model, r_grid):
    """Max over ``r_grid`` of ``|hankel_transform(r) - B(r)|``."""
    if model.spectral_density is None:
        raise QuadratureFailure("model has no spectral density")
    return max(abs(hankel_transform(model, float(r)) - float(model.covariance(r))) for r in r_grid)


@dataclass(frozen=True)
class FieldSample:
    grid: np.ndarray
    values: np.ndarray
    seed: int
    method: str
    r: float
    model_name: str
    h: Optional[float] = None

    def __post_init__(self):
        if len(self.values) != len(self.grid):
            raise ValueError("values and grid must have the same length")


class CirculantEmbedding:
    """Square roots of the circulant eigenvalues for a lattice over ``Delta(r)``.

    Built once per ``(model, window, r, h)`` and then reused for every
    replicate; the arrays are read-only and may be shared between workers.
    """

    def __init__(self, model, window, r, h, psd_tol=PSD_TOL):
        if model.d not in (1, 2):
            raise OutOfRange("circulant embedding supports d = 1 and d = 2")
        if window.d != model.d:
            raise OutOfRange("window and model dimensions differ")
        self.model, self.window, self.r, self.h = model, window, r, h
        self.points, axis, self.mask = lattice(window, r, h)
        n = len(axis)
        self.n = n
        m = 2 * max(n - 1, 1)
        for attempt in range(MAX_DOUBLINGS + 1):
            lam = self._eigenvalues(m)
            lmax = lam.max()
            lmin = lam.min()
            if lmin >= -psd_tol * lmax:
                break
            if attempt == MAX_DOUBLINGS:
                raise EmbeddingNotPSD(
                    f"min eigenvalue {lmin:.3e} (max {lmax:.3e}) after {MAX_DOUBLINGS} doublings")
            m *= 2
        self.m = m
        self.clipped_mass = float(-lam[lam < 0].sum())
        scale = np.sqrt(np.clip(lam, 0.0, None) / lam.size)
        scale.setflags(write=False)
        self.scale = scale

    def _eigenvalues(self, m):
        k = np.arange(m)
        lag = np.minimum(k, m - k) * self.h
        if self.model.d == 1:
            base = self.model.covariance(lag)
        else:
            base = self.model.covariance(np.hypot(lag[:, None], lag[None, :]))
        return np.real(np.fft.fftn(base))

    def sample_values(self, rng):
        """One realization on the kept lattice points."""
        shape = self.scale.shape
        noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        y = np.real(np.fft.fftn(self.scale * noise))
        if self.model.d == 1:
            full = y[: self.n]
        else:
            full = y[: self.n, : self.n].ravel()
        return full[self.mask]


@lru_cache(maxsize=32)
def circulant_embedding(model, window, r, h):
    return CirculantEmbedding(model, window, r, h)


def simulate_circulant(model, r, h, seed, window=None):
    """Exact stationary Gaussian sample on the lattice over ``Delta(r)``."""
    window = cube(model.d) if window is None else window
    emb = circulant_embedding(model, window, float(r), float(h))
    vals = emb.sample_values(make_rng(seed))
    return FieldSample(emb.points, vals, int(seed), "circulant", float(r), model.name, float(h))


class RadialSampler:
    """Inverse-CDF sampler for the radius of the spectral measure.

    The radial density ``u^(d-1) f(u)`` is tabulated on log-spaced nodes and
    integrated in ``log u``; the mass below the first node is taken from the
    power law ``u^alpha`` near the origin.  Interpolation of ``log u`` against
    the CDF is monotone cubic.
    """

    def __init__(self, model, n_nodes=RADIAL_NODES, u_min=1e-30):
        f = model.spectral_density
        if f is None:
            raise RadialCdfTabulationFailure(f"model {model.name} has no spectral density")
        d = model.d
        u_max = _tail_cutoff(model)
        logu = np.linspace(np.log(u_min), np.log(u_max), n_nodes)
        u = np.exp(logu)
        with np.errstate(all="ignore"):
            dens = u**d * f(u)  # density in log u
        if not np.all(np.isfinite(dens)) or np.any(dens < 0):
            raise RadialCdfTabulationFailure("radial density is not finite and nonnegative")
        head = dens[0] / min(model.alpha, d)
        cdf = head + np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(logu))])
        total = cdf[-1]
        if not np.isfinite(total) or total <= 0:
            raise RadialCdfTabulationFailure("radial density cannot be normalised")
        self.mass = sphere_area(d) * total
        cdf = cdf / total
        keep = np.concatenate([[True], np.diff(cdf) > 1e-15])
        self._inv = PchipInterpolator(cdf[keep], logu[keep], extrapolate=False)
        self.cdf_min = cdf[keep][0]
        self.d = d

    def radii(self, rng, n):
        p = rng.uniform(self.cdf_min, 1.0, n)
        return np.exp(self._inv(p))

    def frequencies(self, rng, n):
        rad = self.radii(rng, n)
        if self.d == 1:
            return (rad * rng.choice([-1.0, 1.0], n))[:, None]
        g = rng.standard_normal((n, self.d))
        return rad[:, None] * g / np.linalg.norm(g, axis=1, keepdims=True)


@lru_cache(maxsize=16)
def radial_sampler(model):
    return RadialSampler(model)


def randomization_values(sampler, points, n_freq, rng):
    lam = sampler.frequencies(rng, n_freq)
    phi = rng.uniform(0.0, 2 * pi, n_freq)
    return np.sqrt(2.0 / n_freq) * np.cos(points @ lam.T + phi).sum(axis=1)


def simulate_randomization(model, points, n_freq, seed):
    """``sqrt(2/n) sum_j cos(<lambda_j, x> + phi_j)`` with ``lambda_j ~ f``."""
    if n_freq < 1:
        raise OutOfRange("n_freq must be at least 1")
    pts = np.asarray(points, dtype=float).reshape(-1, model.d)
    vals = randomization_values(radial_sampler(model), pts, int(n_freq), make_rng(seed))
    return FieldSample(pts, vals, int(seed), "randomization", float("nan"), model.name)
