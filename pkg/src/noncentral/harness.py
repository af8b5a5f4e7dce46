"""Experiment configuration and the convergence / concentration pipelines.

Config files are TOML with four sections::

    [model]   name = "cauchy" | "linnik" | "power_law", d, theta, sigma, alpha, taper
    [window]  shape = "cube" | "ball"
    [limit]   method, cutoff, grid_step, mass_cap, n_samples
    [run]     G, r_grid, n_replicates, master_seed, h, hermite_order, workers, output_dir

``G`` is a builtin name (``H1`` .. ``H6``, ``square``, ``cube``, ``sign``,
``abs``) or a list of power-series coefficients ``[a0, a1, ...]``.
Unknown sections or keys raise ``ConfigInvalid``.
"""
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import io
from .errors import ConfigInvalid, NoncentralError
from .fields import cauchy_model, circulant_embedding, power_law_model
from .functionals import normalization, riemann_functionals, variance_x_r_kappa
from .geometry import Window
from .hermite import expand, hermite_eval
from .limit import CHUNK, LimitConfig, limit_variance, sample_limit
from .metrics import (
    CW_CONSTANTS,
    carbery_wright_bound,
    concentration_exponent,
    kolmogorov_two_sample,
    levy_concentration,
)
from .seeding import derive_seed, make_rng, replicate_seeds

MODEL_KEYS = {"name", "d", "theta", "sigma", "alpha", "taper"}
WINDOW_KEYS = {"shape"}
LIMIT_KEYS = {"method", "cutoff", "grid_step", "mass_cap", "n_samples"}
RUN_KEYS = {"G", "r_grid", "n_replicates", "master_seed", "h", "hermite_order", "workers",
            "output_dir"}
SECTIONS = {"model": MODEL_KEYS, "window": WINDOW_KEYS, "limit": LIMIT_KEYS, "run": RUN_KEYS}
MIN_REPLICATES = 100

CONVERGENCE_HEADER = ["r", "n", "ks_distance", "dkw_band", "var_xr", "var_exact", "seed"]
CONCENTRATION_HEADER = ["epsilon", "q_hat", "cw_bound"]


def _freeze(spec):
    return tuple(sorted(spec.items()))


@lru_cache(maxsize=16)
def _model_from_key(key):
    spec = dict(key)
    name = spec.get("name", "cauchy")
    d = int(spec.get("d", 1))
    if name in ("cauchy", "linnik"):
        sigma = float(spec.get("sigma", 2.0 if name == "cauchy" else 1.0))
        return cauchy_model(d, float(spec.get("theta", 1.0)), sigma)
    if name == "power_law":
        return power_law_model(d, float(spec["alpha"]), spec.get("taper"))
    raise ConfigInvalid(f"unknown model {name!r}")


def build_model(spec):
    try:
        return _model_from_key(_freeze(spec))
    except KeyError as exc:
        raise ConfigInvalid(f"model spec is missing {exc}") from None


BUILTIN_G = {
    "square": lambda w: w * w,
    "cube": lambda w: w**3,
    "sign": np.sign,
    "abs": np.abs,
}


def build_G(spec):
    """Callable for a builtin name or a list of power-series coefficients."""
    if isinstance(spec, str):
        if spec.upper().startswith("H") and spec[1:].isdigit():
            k = int(spec[1:])
            return lambda w, k=k: hermite_eval(k, w)
        if spec in BUILTIN_G:
            return BUILTIN_G[spec]
        raise ConfigInvalid(f"unknown builtin G {spec!r}")
    try:
        coeffs = [float(c) for c in spec]
    except TypeError:
        raise ConfigInvalid("G must be a builtin name or a list of coefficients") from None
    if not coeffs:
        raise ConfigInvalid("empty coefficient list for G")
    return lambda w: np.polynomial.polynomial.polyval(w, coeffs)


def _g_degree(spec):
    if isinstance(spec, str):
        if spec.upper().startswith("H") and spec[1:].isdigit():
            return int(spec[1:])
        return 0
    return len(spec) - 1


@dataclass(frozen=True)
class ExperimentConfig:
    model: dict
    window: Window
    G: object
    r_grid: tuple
    n_replicates: int
    limit: LimitConfig
    master_seed: int
    output_dir: str = "."
    h: float = 0.25
    hermite_order: int = 8
    workers: int = 1
    expansion: object = field(default=None, compare=False)

    @property
    def centered(self):
        return self.expansion.centered()

    @property
    def kappa(self):
        return self.centered.rank


def _check_keys(raw):
    for sec, body in raw.items():
        if sec not in SECTIONS:
            raise ConfigInvalid(f"unknown section [{sec}]")
        extra = set(body) - SECTIONS[sec]
        if extra:
            raise ConfigInvalid(f"unknown keys in [{sec}]: {sorted(extra)}")


def config_from_dict(raw):
    """Validate a parsed config and detect the Hermite rank of ``G``."""
    _check_keys(raw)
    for sec in ("model", "run"):
        if sec not in raw:
            raise ConfigInvalid(f"missing section [{sec}]")
    model_spec = dict(raw["model"])
    run = raw["run"]
    lim = raw.get("limit", {})
    d = int(model_spec.get("d", 1))
    window = Window(raw.get("window", {}).get("shape", "cube"), d)
    if "G" not in run or "r_grid" not in run:
        raise ConfigInvalid("[run] needs G and r_grid")
    r_grid = tuple(float(r) for r in run["r_grid"])
    if len(r_grid) == 0 or any(b <= a for a, b in zip(r_grid[:-1], r_grid[1:])):
        raise ConfigInvalid("r_grid must be nonempty and strictly increasing")
    n_rep = int(run.get("n_replicates", 2000))
    if n_rep < MIN_REPLICATES:
        raise ConfigInvalid(f"n_replicates must be at least {MIN_REPLICATES}")
    order = int(run.get("hermite_order", max(8, _g_degree(run["G"]))))
    G = build_G(run["G"])
    try:
        model = build_model(model_spec)
        expansion = expand(G, order, max(128, 2 * order))
    except NoncentralError as exc:
        raise ConfigInvalid(str(exc)) from exc
    kappa = expansion.centered().rank
    if kappa == 0:
        raise ConfigInvalid("G has Hermite rank 0 after centring")
    if not kappa * model.alpha < d:
        raise ConfigInvalid(f"need kappa*alpha < d; kappa={kappa}, alpha={model.alpha}")
    master = int(run.get("master_seed", 0))
    n_lim = int(lim.get("n_samples", max(5000, 2 * n_rep)))
    method = lim.get("method", "wick")
    try:
        base = LimitConfig.default(kappa, d, model.alpha, window, method, n_lim,
                                   derive_seed(master, 2), lim.get("cutoff"))
        limit = LimitConfig(kappa, d, model.alpha, window, base.cutoff,
                            float(lim.get("grid_step", base.grid_step)), method, n_lim, base.seed,
                            float(lim.get("mass_cap", base.mass_cap)))
    except NoncentralError as exc:
        raise ConfigInvalid(str(exc)) from exc
    return ExperimentConfig(model_spec, window, run["G"], r_grid, n_rep, limit, master,
                            run.get("output_dir", "."), float(run.get("h", 0.25)), order,
                            int(run.get("workers", 1)), expansion)


def load_config(path):
    try:
        raw = io.load_toml(path)
    except (OSError, ValueError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(raw)


@dataclass(frozen=True)
class ConvergenceRecord:
    r: float
    n: int
    ks_distance: float
    dkw_band: float
    var_xr: float
    var_exact: float
    seed: int

    def row(self):
        return [self.r, self.n, self.ks_distance, self.dkw_band, self.var_xr, self.var_exact,
                self.seed]


def _functional_chunk(args):
    model_spec, window, r, h, g_spec, c0, kappa, c_kappa, seeds = args
    model = build_model(model_spec)
    emb = circulant_embedding(model, window, r, h)
    vals = np.stack([emb.sample_values(make_rng(s)) for s in seeds])
    return riemann_functionals(vals, build_G(g_spec), h, model.d, c0, kappa, c_kappa)


def functional_batch(cfg, r, seeds, workers=None):
    """``(k_r, k_r_kappa, x_r_kappa)`` arrays for replicate ``seeds`` at scale ``r``."""
    model = build_model(cfg.model)
    exp_c = cfg.centered
    kappa = exp_c.rank
    c_k = exp_c.coefficients[kappa]
    c0 = cfg.expansion.coefficients[0]
    jobs = [(cfg.model, cfg.window, float(r), cfg.h, cfg.G, c0, kappa, c_k, seeds[s:s + CHUNK])
            for s in range(0, len(seeds), CHUNK)]
    workers = cfg.workers if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_functional_chunk, jobs))
    else:
        parts = [_functional_chunk(j) for j in jobs]
    k_r = np.concatenate([p[0] for p in parts])
    k_rk = np.concatenate([p[1] for p in parts])
    x_r = k_r / normalization(model, r, kappa, c_k)
    return k_r, k_rk, x_r


def reference_batch(cfg, workers=None):
    return sample_limit(cfg.limit, cfg.workers if workers is None else workers)


def run_convergence(cfg, workers=None, reference=None):
    """Kolmogorov distance between ``X_{r,k}`` and the limit for every ``r``.

    Returns ``(records, reference_batch, functional_rows)``.
    """
    ref = reference_batch(cfg, workers) if reference is None else reference
    model = build_model(cfg.model)
    records, rows = [], []
    for i, r in enumerate(cfg.r_grid):
        stream = derive_seed(cfg.master_seed, 1, i)
        seeds = replicate_seeds(stream, cfg.n_replicates)
        k_r, k_rk, x_r = functional_batch(cfg, r, seeds, workers)
        rep = kolmogorov_two_sample(x_r, ref.values)
        var_exact = variance_x_r_kappa(model, cfg.window, r, cfg.kappa)
        records.append(ConvergenceRecord(r, cfg.n_replicates, rep.statistic, rep.dkw_band_99,
                                         float(np.var(x_r, ddof=1)), var_exact, stream))
        rows.extend((j, r, a, b, c, int(s)) for j, (a, b, c, s) in enumerate(zip(k_r, k_rk, x_r, seeds)))
    return records, ref, rows


def write_convergence(out_dir, records, ref, rows, cfg):
    io.write_csv(os.path.join(out_dir, "convergence.csv"), CONVERGENCE_HEADER,
                 (rec.row() for rec in records))
    io.export_limit_batch(ref, os.path.join(out_dir, "limit_samples.csv"), cfg.limit)
    io.export_functional_batch(rows, os.path.join(out_dir, "functionals.csv"))


@dataclass(frozen=True)
class ConcentrationTable:
    rows: list
    exponent: float
    dominated: bool


def run_concentration(cfg, eps_grid, workers=None, reference=None):
    """``Q(eps)`` of the limit batch, its log-log slope and the anti-concentration bound.

    The bound column uses ``eps_hat = eps / 2`` and ``t = 0``, the centre of the
    window that maximises the bound; ``dominated`` tells whether every
    ``q_hat`` lies below it.
    """
    ref = reference_batch(cfg, workers) if reference is None else reference
    var = limit_variance(cfg.limit)
    kappa = cfg.limit.kappa
    c_k = CW_CONSTANTS.get(kappa, CW_CONSTANTS[3])
    rows = []
    for eps in eps_grid:
        q = levy_concentration(ref.values, float(eps))
        b = carbery_wright_bound(kappa, float(eps) / 2, 0.0, var, c_k)
        rows.append((float(eps), q, b))
    try:
        slope = concentration_exponent(ref.values, eps_grid)
    except NoncentralError:
        slope = float("nan")
    dominated = all(q <= b for _, q, b in rows)
    return ConcentrationTable(rows, slope, dominated)


def write_concentration(out_dir, table):
    io.write_csv(os.path.join(out_dir, "concentration.csv"), CONCENTRATION_HEADER, table.rows)
    io.write_json(os.path.join(out_dir, "concentration_summary.json"),
                  {"exponent": table.exponent, "cw_dominated": table.dominated})
