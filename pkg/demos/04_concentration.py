"""Levy concentration of the limit laws and calibration of the anti-concentration constants.

Reruns the calibration behind ``metrics.CW_CONSTANTS``: 20000 wick samples
per order, seed 990001, constant = 1.5 x the largest observed ratio of
P(|X - t| <= eps) to the bound with c = 1.
"""
import numpy as np

from noncentral.geometry import cube
from noncentral.limit import LimitConfig, limit_variance, sample_limit
from noncentral.metrics import (
    CW_CONSTANTS,
    calibrate_cw_constant,
    carbery_wright_bound,
    concentration_exponent,
    levy_concentration,
)

for kappa, alpha in ((2, 0.3), (3, 0.2)):
    cfg = LimitConfig.default(kappa, 1, alpha, cube(1), "wick", 20000, 990001)
    x = sample_limit(cfg).values
    var = limit_variance(cfg)
    c = calibrate_cw_constant(x, kappa, var)
    print(f"kappa={kappa}: calibrated constant {c:.4f}, shipped {CW_CONSTANTS[kappa]}")
    eps = np.sqrt(var) * np.geomspace(0.05, 0.5, 6)
    print(f"    concentration exponent {concentration_exponent(x, eps):.3f}")
    print("      eps      Q(eps)   bound(eps/2, t=0)")
    for e in eps:
        q = levy_concentration(x, e)
        b = carbery_wright_bound(kappa, e / 2, 0.0, var, CW_CONSTANTS[kappa])
        print(f"    {e:7.4f}   {q:.4f}   {b:.4f}")
