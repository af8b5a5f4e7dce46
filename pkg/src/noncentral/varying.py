"""Slowly varying functions with a remainder term.

A ``SlowlyVarying`` object carries the function ``L`` together with the
remainder index ``tau <= 0`` and the remainder function ``g`` that bounds the
speed of ``L(tr)/L(r) -> 1``.  The checks here are numeric scans only.
"""
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateGrid, NonPositiveArgument

DEFAULT_RATIO_CAP = 1e3
DEFAULT_GROWTH_TOL = 0.5


def h_tau(tau, x):
    """``ln x`` when ``tau == 0`` and ``(x**tau - 1) / tau`` otherwise."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise NonPositiveArgument("h_tau needs x > 0")
    out = np.log(x) if tau == 0 else np.expm1(tau * np.log(x)) / tau
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SlowlyVarying:
    func: Callable
    tau: float
    remainder_g: Callable
    description: str
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, r):
        return self.func(r)

    def g(self, r):
        return self.remainder_g(r)

    def limit_constant(self):
        """Finite limit of ``L`` at infinity, or None when ``L`` diverges or vanishes."""
        if self.kind == "constant":
            return self.params["c"]
        if self.kind == "power_remainder":
            return self.params["c0"]
        if self.kind == "custom":
            return self.params.get("limit")
        return None


def constant(c=1.0):
    if c <= 0:
        raise NonPositiveArgument("a slowly varying function must be positive")
    return SlowlyVarying(
        func=lambda r: c + 0.0 * np.asarray(r, dtype=float),
        tau=0.0,
        remainder_g=lambda r: 1.0 / np.log(np.asarray(r, dtype=float)),
        description=f"L(r) = {c}",
        kind="constant",
        params={"c": c},
    )


def log_power(p=1.0):
    """``L(r) = (ln r)^p`` with ``g(r) = 1/ln r`` and ``tau = 0``."""
    return SlowlyVarying(
        func=lambda r: np.log(np.asarray(r, dtype=float)) ** p,
        tau=0.0,
        remainder_g=lambda r: 1.0 / np.log(np.asarray(r, dtype=float)),
        description=f"L(r) = ln(r)^{p}",
        kind="log_power",
        params={"p": p},
    )


def power_remainder(c, tau, c0=1.0):
    """``L(r) = c0 (1 + c r^tau)`` with ``g(r) = r^tau``, ``tau < 0``."""
    if tau >= 0:
        raise NonPositiveArgument("power_remainder needs tau < 0")
    return SlowlyVarying(
        func=lambda r: c0 * (1.0 + c * np.asarray(r, dtype=float) ** tau),
        tau=tau,
        remainder_g=lambda r: np.asarray(r, dtype=float) ** tau,
        description=f"L(r) = {c0} (1 + {c} r^{tau})",
        kind="power_remainder",
        params={"c": c, "tau": tau, "c0": c0},
    )


def custom(func, tau, remainder_g, description, limit=None):
    return SlowlyVarying(func, tau, remainder_g, description, "custom", {"limit": limit})


@dataclass(frozen=True)
class RemainderReport:
    max_ratio: float
    grid: str
    holds: bool
    ratios: np.ndarray = field(repr=False)


def remainder_ratios(L, r_grid, t_grid):
    """``|1 - L(tr)/L(r)| / (g(r) h_tau(t))`` on the grid, rows indexed by r.

    Entries with ``t == 1`` are set to 0 (both sides vanish there).
    """
    r = np.asarray(r_grid, dtype=float)[:, None]
    t = np.asarray(t_grid, dtype=float)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        num = np.abs(1.0 - L(t * r) / L(r))
        den = L.g(r) * h_tau(L.tau, np.broadcast_to(t, (1, t.shape[1])))
        out = np.where(t == 1.0, 0.0, num / den)
    return out


def check_remainder_condition(L, r_grid, t_grid, cap=DEFAULT_RATIO_CAP,
                              growth_tol=DEFAULT_GROWTH_TOL, r_min=10.0):
    """Scan the remainder condition ``|1 - L(tr)/L(r)| <= C g(r) h_tau(t)``.

    The condition holds on the scan when every ratio is finite and below
    ``cap`` and, for every ``r``, the ratio does not keep growing along the
    upper half of the (log-scaled) ``t`` grid by more than ``growth_tol``
    relative to its value at the midpoint.  The second test flags functions
    such as ``ln^2`` whose ratio grows like ``ln t``.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if r_grid.size == 0 or t_grid.size == 0:
        raise DegenerateGrid("empty r or t grid")
    if np.any(r_grid < r_min):
        raise DegenerateGrid(f"r values must be at least {r_min}")
    if np.any(t_grid < 1):
        raise DegenerateGrid("t values must be >= 1")
    t_sorted = np.unique(t_grid)
    ratios = remainder_ratios(L, np.sort(r_grid), t_sorted)
    finite = bool(np.all(np.isfinite(ratios)))
    max_ratio = float(np.max(ratios)) if finite else float("inf")

    diverging = False
    active = t_sorted > 1.0
    if finite and active.sum() >= 4:
        tail = ratios[:, active]
        mid = tail.shape[1] // 2
        upper = tail[:, mid:]
        increasing = np.all(np.diff(upper, axis=1) > 0, axis=1)
        growth = (upper[:, -1] - upper[:, 0]) / np.maximum(upper[:, 0], 1e-300)
        diverging = bool(np.any(increasing & (growth > growth_tol)))

    desc = (f"r in [{r_grid.min():g}, {r_grid.max():g}] ({r_grid.size} pts), "
            f"t in [{t_sorted.min():g}, {t_sorted.max():g}] ({t_sorted.size} pts)")
    holds = finite and max_ratio <= cap and not diverging
    return RemainderReport(max_ratio=max_ratio, grid=desc, holds=holds, ratios=ratios)


def lemma0_ratio(L, k, delta, r, t):
    """``|1 - (L(tr)/L(r))^{k/2}| / (g(r) h_tau(t) t^delta)``; 0 at ``t == 1``."""
    if k <= 0 or delta <= 0 or r <= 0:
        raise NonPositiveArgument("k, delta and r must be positive")
    if t < 1:
        raise NonPositiveArgument("t must be >= 1")
    if t == 1:
        return 0.0
    q = float(L(t * r)) / float(L(r))
    num = abs(1.0 - q ** (k / 2.0))
    den = float(L.g(r)) * h_tau(L.tau, t) * t**delta
    return num / den
