"""Hermite-type limit laws ``X_k(Delta)`` and their second moment.

The limit is the multiple Wiener-Ito integral

    X_k(Delta) = c2^(k/2) int' K_Delta(l_1 + ... + l_k) prod |l_j|^((alpha-d)/2) W(dl_1)...W(dl_k)

with variance ``k! int int_{Delta^2} |x - y|^(-k alpha) dx dy``.  Two samplers:

* ``wick``: the Hermite functional ``h^d sum sigma^k H_k(Z/sigma)`` of a
  lattice Gaussian field ``Z`` over ``Delta`` with spacing ``h = pi / cutoff``
  (the lattice Nyquist frequency is the spectral cutoff).  The covariance is
  the ``k``-th root of the cell average of ``|x - y|^(-k alpha)``, so the
  output has the exact limit variance at every cutoff.
* ``tensor`` (``d = 1``, ``k <= 3``): direct discretisation of the integral on
  a symmetric frequency grid with Hermitian complex noise and the diagonal
  ``|m_i| = |m_j|`` excluded.  Variance lost above the cutoff is restored by
  an independent Gaussian term.
"""
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from math import factorial, pi, sqrt

import numpy as np
from scipy import integrate

from .errors import (
    CutoffTooSmall,
    EmbeddingNotPSD,
    HermitianViolation,
    OutOfRange,
    QuadratureFailure,
    UnsupportedOrder,
)
from .fields import c2, sphere_area
from .geometry import Window, cube, indicator_ft, lattice, reduce_double_integral
from .hermite import hermite_eval
from .seeding import make_rng, replicate_seeds

CHUNK = 256
MIN_NODES = 32
PSD_TOL = 1e-8
HERMITIAN_TOL = 1e-8
HERMITIAN_CHECK_REPS = 32

TENSOR_DEFAULTS = {
    1: {"cutoff": 100.0, "grid_step": 0.25, "mass_cap": 0.002},
    2: {"cutoff": 100.0, "grid_step": 0.25, "mass_cap": 0.002},
    3: {"cutoff": 20.0, "grid_step": 0.5, "mass_cap": 0.025},
}


def wick_nodes(window, cutoff):
    """Lattice nodes across the window for spacing ``pi / cutoff``."""
    return int(np.ceil(2 * window.half_extent * cutoff / pi - 1e-9))


def default_wick_cutoff(d):
    return 400 * pi if d == 1 else 40 * pi


@dataclass(frozen=True)
class LimitConfig:
    kappa: int
    d: int
    alpha: float
    window: Window
    cutoff: float
    grid_step: float
    method: str = "wick"
    n_samples: int = 5000
    seed: int = 0
    mass_cap: float = 0.002

    def __post_init__(self):
        if self.kappa < 1:
            raise OutOfRange("kappa must be at least 1")
        if not 0 < self.alpha or self.kappa * self.alpha >= self.d:
            raise OutOfRange(f"need 0 < kappa*alpha < d, got kappa={self.kappa}, alpha={self.alpha}")
        if self.window.d != self.d:
            raise OutOfRange("window dimension differs from d")
        if self.method not in ("wick", "tensor"):
            raise OutOfRange(f"unknown method {self.method!r}")
        if self.cutoff <= 0 or self.grid_step <= 0:
            raise OutOfRange("cutoff and grid_step must be positive")
        if self.cutoff / self.grid_step < MIN_NODES:
            raise CutoffTooSmall(f"cutoff/grid_step = {self.cutoff / self.grid_step:.1f} < {MIN_NODES}")
        if self.method == "wick" and wick_nodes(self.window, self.cutoff) < MIN_NODES:
            raise CutoffTooSmall(f"only {wick_nodes(self.window, self.cutoff)} lattice nodes "
                                 f"across the window (need {MIN_NODES})")
        if self.n_samples < 1:
            raise OutOfRange("n_samples must be positive")

    @classmethod
    def default(cls, kappa, d=1, alpha=0.3, window=None, method="wick", n_samples=5000, seed=0,
                cutoff=None):
        window = cube(d) if window is None else window
        if method == "tensor":
            dflt = TENSOR_DEFAULTS.get(kappa, TENSOR_DEFAULTS[3])
            cut = dflt["cutoff"] if cutoff is None else cutoff
            return cls(kappa, d, alpha, window, cut, dflt["grid_step"], method, n_samples, seed,
                       dflt["mass_cap"])
        cut = default_wick_cutoff(d) if cutoff is None else cutoff
        return cls(kappa, d, alpha, window, cut, cut / 64, method, n_samples, seed)

    def to_dict(self):
        out = asdict(self)
        out["window"] = self.window.to_dict()
        return out


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray
    seeds: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.values)


def as_values(batch):
    return np.asarray(batch.values if isinstance(batch, SampleBatch) else batch, dtype=float)


# ---------------------------------------------------------------- variance

def limit_variance(cfg):
    """``k! int int_{Delta^2} |x - y|^(-k alpha) dx dy`` via the distance density."""
    p = cfg.kappa * cfg.alpha
    return factorial(cfg.kappa) * reduce_double_integral(cfg.window, 1.0, lambda z: z ** (-p))


def _spectral_integral(w, p, top=None):
    # int_{R^d} |K(s)|^2 |s|^(p - d) ds for radial K (balls, and d = 1)
    d = w.d
    if w.shape == "cube" and d > 1:
        raise OutOfRange("spectral form is available for balls and d = 1")
    top = 4000.0 if top is None else top
    g = lambda s: float(indicator_ft(w, s if d == 1 else np.array([s] + [0.0] * (d - 1)))) ** 2 * s ** (p - 1)
    edges = np.concatenate([[0.0], np.arange(pi, top, pi), [top]])
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(g, lo, hi, limit=100)
        total += v
    # |K|^2 averages to env / s^(d+1) over an oscillation period
    env = 2.0 if w.shape == "cube" else (2 * pi) ** d / pi
    tail = env * top ** (p - d - 1) / (d + 1 - p)
    if not np.isfinite(total):
        raise QuadratureFailure("spectral kernel integral did not converge")
    return sphere_area(d) * (total + tail)


def limit_variance_spectral(cfg):
    """``k! c2(d, k alpha) int |K_Delta(s)|^2 |s|^(k alpha - d) ds``."""
    p = cfg.kappa * cfg.alpha
    return factorial(cfg.kappa) * c2(cfg.d, p) * _spectral_integral(cfg.window, p)


def kernel_norm_sq(cfg):
    """``||K_hat||^2 = Var X / (k! c2^k)``."""
    return limit_variance(cfg) / (factorial(cfg.kappa) * c2(cfg.d, cfg.alpha) ** cfg.kappa)


# ---------------------------------------------------------------- wick

def _interval_cell_average(k, p):
    # (1/h^2) int int over cells 0 and k of |x - y|^-p, in units h = 1
    k = np.abs(np.asarray(k, dtype=float))
    q = 2.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        val = ((k + 1) ** q - 2 * k**q + np.abs(k - 1) ** q) / ((1 - p) * q)
    return val


def _square_cell_average(kx, ky, p):
    # (1/h^4) int int over two unit cells at lag (kx, ky) of |x - y|^-p
    x, wts = np.polynomial.legendre.leggauss(8)
    u = 0.5 * (x + 1)  # nodes on (0, 1)
    wu = 0.5 * wts
    out = np.empty(len(kx))
    # triangle weight (1 - |t|) on (-1, 1), split at 0 so both halves are smooth
    t = np.concatenate([-u[::-1], u])
    wt = np.concatenate([wu[::-1], wu]) * (1 - np.abs(t))
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    W = np.outer(wt, wt)
    near = (np.abs(kx) <= 2) & (np.abs(ky) <= 2)
    for i in np.flatnonzero(~near):
        r = np.hypot(kx[i] + T1, ky[i] + T2)
        out[i] = np.sum(W * r ** (-p))
    for i in np.flatnonzero(near):
        f = lambda b, a, i=i: (1 - abs(a)) * (1 - abs(b)) * np.hypot(kx[i] + a, ky[i] + b) ** (-p)
        tot = 0.0
        # split at the lines where the integrand kinks or is singular
        ax = sorted({-1.0, 0.0, 1.0, float(np.clip(-kx[i], -1, 1))})
        ay = sorted({-1.0, 0.0, 1.0, float(np.clip(-ky[i], -1, 1))})
        for a0, a1 in zip(ax[:-1], ax[1:]):
            for b0, b1 in zip(ay[:-1], ay[1:]):
                tot += integrate.dblquad(f, a0, a1, b0, b1, epsabs=1e-10, epsrel=1e-8)[0]
        out[i] = tot
    return out


class WickKernel:
    """Factor ``A`` with ``A A^T = C`` for the lattice field of the wick sampler."""

    def __init__(self, cfg):
        w, d, p, kappa = cfg.window, cfg.d, cfg.kappa * cfg.alpha, cfg.kappa
        if d > 2:
            raise UnsupportedOrder("wick sampler supports d = 1 and d = 2")
        h = pi / cfg.cutoff
        extent = 2 * w.half_extent
        n_axis = wick_nodes(w, cfg.cutoff)
        if n_axis < MIN_NODES:
            raise CutoffTooSmall(f"only {n_axis} lattice nodes across the window (need {MIN_NODES})")
        h = extent / n_axis
        pts, _, _ = lattice(w, 1.0, h)
        # twice the lattice coordinate is an integer of fixed parity
        idx = np.rint(pts / h * 2).astype(int)
        if d == 1:
            lag = np.abs(idx[:, 0][:, None] - idx[:, 0][None, :]) // 2
            avg = _interval_cell_average(np.arange(n_axis), p)[lag]
        else:
            lx = np.abs(idx[:, 0][:, None] - idx[:, 0][None, :]) // 2
            ly = np.abs(idx[:, 1][:, None] - idx[:, 1][None, :]) // 2
            lo, hi = np.minimum(lx, ly), np.maximum(lx, ly)
            keys = lo * n_axis + hi
            uniq = np.unique(keys)
            vals = _square_cell_average(uniq // n_axis, uniq % n_axis, p)
            avg = vals[np.searchsorted(uniq, keys)]
        C = (avg * h ** (-p)) ** (1.0 / kappa)
        lam, vec = np.linalg.eigh(C)
        if lam.min() < -PSD_TOL * lam.max():
            raise EmbeddingNotPSD(f"wick covariance has eigenvalue {lam.min():.3e}")
        self.factor = vec * np.sqrt(np.clip(lam, 0.0, None))
        self.factor.setflags(write=False)
        self.sigma = float(np.sqrt(C[0, 0]))
        self.h, self.d, self.kappa, self.n_points = h, d, kappa, len(pts)
        self.points = pts

    def values(self, noise):
        """Map standard normal noise (rows = replicates) to limit samples."""
        Z = noise @ self.factor.T
        s = self.sigma
        return self.h**self.d * s**self.kappa * hermite_eval(self.kappa, Z / s).sum(axis=1)


def _cfg_key(cfg):
    return (cfg.kappa, cfg.d, cfg.alpha, cfg.window, cfg.cutoff, cfg.grid_step, cfg.mass_cap)


@lru_cache(maxsize=8)
def _wick_kernel(key):
    kappa, d, alpha, window, cutoff, step, cap = key
    return WickKernel(LimitConfig(kappa, d, alpha, window, cutoff, step, "wick", 1, 0, cap))


def wick_kernel(cfg):
    return _wick_kernel(_cfg_key(cfg))


def _chunks(n):
    return [(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]


def _wick_chunk(cfg, seeds):
    ker = wick_kernel(cfg)
    noise = np.stack([make_rng(s).standard_normal(ker.n_points) for s in seeds])
    return ker.values(noise)


def sample_limit_wick(cfg, workers=1):
    if cfg.method != "wick":
        raise OutOfRange("config method is not 'wick'")
    seeds = replicate_seeds(cfg.seed, cfg.n_samples)
    vals = _run_chunks(_wick_chunk, cfg, seeds, workers)
    return SampleBatch(vals, seeds, {"limit": cfg.to_dict()})


# ---------------------------------------------------------------- tensor

def tensor_cells(alpha, cutoff, step, mass_cap, d=1):
    """Positive frequency cells ``(representative, mass)`` of ``c2 |l|^(alpha-1)`` on ``(0, cutoff]``."""
    cc = c2(d, alpha)
    reps, masses = [], []
    lo = 0.0
    while lo < cutoff - 1e-12:
        hi_mass = (lo**alpha + alpha * mass_cap / cc) ** (1.0 / alpha)
        hi = min(lo + step, hi_mass, cutoff)
        mass = cc * (hi**alpha - lo**alpha) / alpha
        rep = alpha / (alpha + 1) * (hi ** (alpha + 1) - lo ** (alpha + 1)) / (hi**alpha - lo**alpha)
        reps.append(rep)
        masses.append(mass)
        lo = hi
    return np.array(reps), np.array(masses)


class TensorKernel:
    """Discretised kernel of the multiple integral on the signed frequency grid."""

    def __init__(self, cfg):
        if cfg.d != 1:
            raise UnsupportedOrder("tensor sampler supports d = 1 only")
        if cfg.kappa > 3:
            raise UnsupportedOrder("tensor sampler supports kappa <= 3")
        lam, mass = tensor_cells(cfg.alpha, cfg.cutoff, cfg.grid_step, cfg.mass_cap)
        self.kappa, self.window = cfg.kappa, cfg.window
        self.lam, self.weight = lam, np.sqrt(mass)
        self.M = len(lam)
        self.signed_lam = np.concatenate([lam, -lam])
        sw = np.concatenate([self.weight, self.weight])
        k = cfg.kappa
        M2 = 2 * self.M
        absidx = np.concatenate([np.arange(self.M), np.arange(self.M)])
        if k == 1:
            T = indicator_ft(self.window, self.signed_lam) * sw
        else:
            grids = np.meshgrid(*([np.arange(M2)] * k), indexing="ij")
            total = sum(self.signed_lam[g] for g in grids)
            T = indicator_ft(self.window, total)
            for g in grids:
                T = T * sw[g]
            for i in range(k):
                for j in range(i + 1, k):
                    T = np.where(absidx[grids[i]] == absidx[grids[j]], 0.0, T)
        self.T = T
        self.T.setflags(write=False)
        self.captured_variance = float(factorial(k) * np.sum(T * T))
        self.target_variance = limit_variance(cfg)
        self.tail_variance = max(self.target_variance - self.captured_variance, 0.0)
        if k == 2:
            lm, ln = lam[:, None], lam[None, :]
            ww = np.outer(self.weight, self.weight)
            kp = indicator_ft(self.window, lm + ln)
            km = indicator_ft(self.window, lm - ln)
            Qa, Qb = ww * (km + kp), ww * (km - kp)
            np.fill_diagonal(Qa, 0.0)
            np.fill_diagonal(Qb, 0.0)
            Qa.setflags(write=False)
            Qb.setflags(write=False)
            self.Qa, self.Qb = Qa, Qb
        self.M2 = M2

    def zeta(self, a, b):
        """Hermitian noise on the signed grid from real parts ``a`` and imaginary parts ``b``."""
        z = (a + 1j * b) / sqrt(2.0)
        return np.concatenate([z, np.conj(z)], axis=-1)

    def contract(self, zeta):
        """``sum' T_{m_1..m_k} zeta_{m_1}...zeta_{m_k}`` for rows of ``zeta`` (complex)."""
        zeta = np.atleast_2d(zeta)
        out = zeta @ self.T.reshape(self.M2, -1).astype(complex) if self.kappa > 1 else zeta @ self.T
        for _ in range(self.kappa - 2):
            out = np.einsum("cm,cmn->cn", zeta, out.reshape(len(zeta), self.M2, -1))
        if self.kappa >= 2:
            out = np.einsum("cm,cm->c", zeta, out.reshape(len(zeta), self.M2))
        return out

    def real_quadratic(self, a, b):
        """Real form of the ``k = 2`` contraction: ``a^T Qa a + b^T Qb b``."""
        return np.einsum("cm,cm->c", a @ self.Qa, a) + np.einsum("cm,cm->c", b @ self.Qb, b)


@lru_cache(maxsize=8)
def _tensor_kernel(key):
    kappa, d, alpha, window, cutoff, step, cap = key
    return TensorKernel(LimitConfig(kappa, d, alpha, window, cutoff, step, "tensor", 1, 0, cap))


def tensor_kernel(cfg):
    return _tensor_kernel(_cfg_key(cfg))


def _tensor_chunk(cfg, seeds, check=0):
    ker = tensor_kernel(cfg)
    M = ker.M
    a = np.empty((len(seeds), M))
    b = np.empty((len(seeds), M))
    tail = np.empty(len(seeds))
    for i, s in enumerate(seeds):
        rng = make_rng(s)
        a[i] = rng.standard_normal(M)
        b[i] = rng.standard_normal(M)
        tail[i] = rng.standard_normal()
    if ker.kappa == 2:
        vals = ker.real_quadratic(a, b)
        if check:
            direct = ker.contract(ker.zeta(a[:check], b[:check]))
            _check_hermitian(direct, vals[:check])
    else:
        direct = ker.contract(ker.zeta(a, b))
        _check_hermitian(direct, direct.real)
        vals = direct.real
    return vals + sqrt(ker.tail_variance) * tail


def _check_hermitian(direct, real_vals):
    scale = max(float(np.max(np.abs(real_vals))), 1e-300)
    resid = max(float(np.max(np.abs(direct.imag))), float(np.max(np.abs(direct.real - real_vals))))
    if resid > HERMITIAN_TOL * scale:
        raise HermitianViolation(f"imaginary residual {resid:.3e} exceeds tolerance")


def sample_limit_tensor(cfg, workers=1):
    if cfg.method != "tensor":
        raise OutOfRange("config method is not 'tensor'")
    if cfg.d != 1 or cfg.kappa > 3:
        raise UnsupportedOrder("tensor sampler supports d = 1 and kappa <= 3")
    seeds = replicate_seeds(cfg.seed, cfg.n_samples)
    vals = _run_chunks(_tensor_chunk, cfg, seeds, workers)
    ker = tensor_kernel(cfg)
    prov = {"limit": cfg.to_dict(), "captured_variance": ker.captured_variance,
            "tail_variance": ker.tail_variance, "cells": ker.M}
    return SampleBatch(vals, seeds, prov)


def sample_limit(cfg, workers=1):
    if cfg.method == "tensor":
        return sample_limit_tensor(cfg, workers)
    return sample_limit_wick(cfg, workers)


# ---------------------------------------------------------------- plumbing

def _chunk_job(args):
    fn, cfg, seeds, check = args
    if fn is _tensor_chunk:
        return fn(cfg, seeds, check)
    return fn(cfg, seeds)


def _run_chunks(fn, cfg, seeds, workers):
    # chunk boundaries depend only on the replicate index, never on the
    # number of workers, so results are identical for any worker count
    jobs = [(fn, cfg, seeds[s:e], HERMITIAN_CHECK_REPS if s == 0 else 0) for s, e in _chunks(len(seeds))]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_job, jobs))
    else:
        parts = [_chunk_job(j) for j in jobs]
    return np.concatenate(parts)
