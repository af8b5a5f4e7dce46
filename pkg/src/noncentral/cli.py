"""Command line entry point: ``noncentral <subcommand>``."""
import argparse
import json
import sys

import numpy as np

from . import io
from .errors import NoncentralError
from .geometry import Window, default_spacing
from .harness import (
    build_model,
    load_config,
    run_concentration,
    run_convergence,
    write_concentration,
    write_convergence,
)
from .limit import LimitConfig, sample_limit
from .rates import fit_rate, rate_bound


def _rate_bound(args):
    rb = rate_bound(args.d, args.alpha, args.kappa, args.tau, args.a, clamp_tau=args.clamp_tau)
    print(json.dumps(rb.to_dict(), indent=2))


def _simulate_field(args):
    from .fields import simulate_circulant

    spec = {"name": args.model, "d": args.d}
    for key in ("theta", "sigma", "alpha"):
        if getattr(args, key) is not None:
            spec[key] = getattr(args, key)
    model = build_model(spec)
    window = Window(args.window, args.d)
    h = args.h if args.h is not None else default_spacing(window, args.r)
    sample = simulate_circulant(model, args.r, h, args.seed, window)
    io.export_field(sample, args.out, model)
    print(f"wrote {len(sample.values)} points to {args.out}")


def _sample_limit(args):
    cfg = LimitConfig.default(args.kappa, args.d, args.alpha, Window(args.window, args.d),
                              args.method, args.n, args.seed, args.cutoff)
    batch = sample_limit(cfg, args.workers)
    io.export_limit_batch(batch, args.out, cfg)
    print(f"wrote {len(batch)} samples to {args.out}")


def _converge(args):
    cfg = load_config(args.config)
    records, ref, rows = run_convergence(cfg, args.workers)
    write_convergence(args.out, records, ref, rows, cfg)
    for rec in records:
        print(f"r={rec.r:g}  ks={rec.ks_distance:.4f}  band={rec.dkw_band:.4f}  "
              f"var_xr={rec.var_xr:.4f}  var_exact={rec.var_exact:.4f}")


def _concentration(args):
    cfg = load_config(args.config)
    eps = [float(e) for e in args.eps.split(",") if e.strip()]
    table = run_concentration(cfg, eps, args.workers)
    write_concentration(args.out, table)
    print(f"exponent={table.exponent:.4f}  cw_dominated={table.dominated}")
    if np.isnan(table.exponent):
        print("exponent not fitted: need at least 3 eps values spanning a decade", file=sys.stderr)


def _fit(args):
    rows = io.read_csv(args.inp)
    r = [float(row["r"]) for row in rows]
    rho = [float(row["ks_distance"]) for row in rows]
    slope, intercept, resid = fit_rate(r, rho)
    io.write_json(args.out, {"slope": slope, "intercept": intercept, "residual": resid})
    print(f"slope={slope:.4f}  intercept={intercept:.4f}  residual={resid:.4f}")


def build_parser():
    p = argparse.ArgumentParser(prog="noncentral", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("rate-bound", help="print the rate exponents as JSON")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--kappa", type=int, required=True)
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--a", type=float, default=None)
    s.add_argument("--clamp-tau", action="store_true",
                   help="clamp tau into the admissible range instead of failing")
    s.set_defaults(func=_rate_bound)

    s = sub.add_parser("simulate-field", help="simulate one field on a lattice over Delta(r)")
    s.add_argument("--model", default="cauchy", choices=["cauchy", "linnik", "power_law"])
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--r", type=float, required=True)
    s.add_argument("--h", type=float, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--theta", type=float, default=None)
    s.add_argument("--sigma", type=float, default=None)
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--window", default="cube", choices=["cube", "ball"])
    s.set_defaults(func=_simulate_field)

    s = sub.add_parser("sample-limit", help="draw samples of the limit law")
    s.add_argument("--kappa", type=int, required=True)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--window", default="cube", choices=["cube", "ball"])
    s.add_argument("--method", default="wick", choices=["wick", "tensor"])
    s.add_argument("--cutoff", type=float, default=None)
    s.add_argument("--n", type=int, default=5000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=_sample_limit)

    s = sub.add_parser("converge", help="run the convergence experiment")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=_converge)

    s = sub.add_parser("concentration", help="Levy concentration of the limit batch")
    s.add_argument("--config", required=True)
    s.add_argument("--eps", required=True, help="comma separated list of eps values")
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=_concentration)

    s = sub.add_parser("fit", help="fit a log-log rate to a convergence CSV")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_fit)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except NoncentralError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
