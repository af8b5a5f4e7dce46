"""CSV / JSON persistence and config parsing."""
import csv
import json
import os
import sys

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path, obj):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def sidecar_path(csv_path):
    root, _ = os.path.splitext(csv_path)
    return root + ".json"


def export_field(sample, path, model):
    d = sample.grid.shape[1]
    header = [f"x{i + 1}" for i in range(d)] + ["value"]
    rows = (list(p) + [v] for p, v in zip(sample.grid, sample.values))
    write_csv(path, header, rows)
    write_json(sidecar_path(path), {"model": model.to_dict(), "r": sample.r, "h": sample.h,
                                    "seed": sample.seed, "method": sample.method})


def export_limit_batch(batch, path, config):
    write_csv(path, ["replicate", "value", "seed"],
              ((i, v, int(s)) for i, (v, s) in enumerate(zip(batch.values, batch.seeds))))
    write_json(sidecar_path(path), config.to_dict())


def export_functional_batch(rows, path):
    write_csv(path, ["replicate", "r", "k_r", "k_r_kappa", "x_r_kappa", "seed"], rows)


def load_toml(path):
    with open(path, "rb") as fh:
        return tomllib.load(fh)
