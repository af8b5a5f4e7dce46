"""Hermite coefficients and ranks of a few nonlinearities."""
import numpy as np

from noncentral.hermite import expand

functions = {
    "w^2 - 1": lambda w: w * w - 1,
    "w^2": lambda w: w * w,
    "sign(w)": np.sign,
    "|w|": np.abs,
    "exp(w/2)": lambda w: np.exp(w / 2),
}

for name, G in functions.items():
    e = expand(G, 8)
    c = e.centered()
    print(f"{name:10s} rank={e.rank}  rank after centring={c.rank}")
    print("    C_j =", np.array2string(np.asarray(e.coefficients), precision=4, suppress_small=True))
    print(f"    Parseval partial sum {e.parseval_partial():.6f} of {e.l2_norm_sq:.6f}")
