import copy
import filecmp
import os

import numpy as np
import pytest

from noncentral.errors import ConfigInvalid
from noncentral.harness import (
    build_G,
    config_from_dict,
    functional_batch,
    load_config,
    run_concentration,
    run_convergence,
    write_concentration,
    write_convergence,
)
from noncentral.io import read_csv
from noncentral.limit import SampleBatch
from noncentral.metrics import dkw_band
from noncentral.seeding import replicate_seeds

BASE = {
    "model": {"name": "cauchy", "d": 1, "theta": 0.15},
    "window": {"shape": "cube"},
    "limit": {"method": "wick"},
    "run": {"G": "H2", "r_grid": [25, 50], "n_replicates": 200, "master_seed": 7, "h": 0.25},
}

TOML = """\
[model]
name = "cauchy"
d = 1
theta = 0.15

[window]
shape = "cube"

[limit]
method = "wick"
n_samples = 1000

[run]
G = "H2"
r_grid = [25, 50]
n_replicates = 300
master_seed = 11
h = 0.25
"""


def raw(**changes):
    out = copy.deepcopy(BASE)
    for key, val in changes.items():
        sec, name = key.split("__")
        if val is None:
            out[sec].pop(name, None)
        else:
            out.setdefault(sec, {})[name] = val
    return out


def test_config_defaults():
    cfg = config_from_dict(raw())
    assert cfg.kappa == 2 and cfg.limit.kappa == 2
    assert cfg.limit.n_samples == 5000
    assert cfg.r_grid == (25.0, 50.0)


@pytest.mark.parametrize("bad", [
    raw(run__r_grid=[50, 25]),
    raw(run__r_grid=[25, 25]),
    raw(run__r_grid=[]),
    raw(run__n_replicates=50),
    raw(run__G="H0"),
    raw(run__G="mystery"),
    raw(run__G=[3.0]),
    raw(run__colour="red"),
    raw(model__name="matern"),
    raw(model__theta=0.5),  # kappa alpha = 2 >= d
    raw(run__G=None),
    raw(limit__cutoff=1.0),
])
def test_config_invalid(bad):
    with pytest.raises(ConfigInvalid):
        config_from_dict(bad)


def test_unknown_section_and_missing_file(tmp_path):
    bad = raw()
    bad["plot"] = {"dpi": 100}
    with pytest.raises(ConfigInvalid):
        config_from_dict(bad)
    with pytest.raises(ConfigInvalid):
        load_config(str(tmp_path / "nope.toml"))
    p = tmp_path / "broken.toml"
    p.write_text("[model\nname=")
    with pytest.raises(ConfigInvalid):
        load_config(str(p))


def test_build_G():
    w = np.array([-1.0, 0.5, 2.0])
    np.testing.assert_allclose(build_G("H2")(w), w * w - 1)
    np.testing.assert_allclose(build_G([1, 0, 2])(w), 1 + 2 * w * w)
    np.testing.assert_allclose(build_G("abs")(w), np.abs(w))


def test_rank_detected_after_centring():
    cfg = config_from_dict(raw(run__G="square"))
    assert cfg.kappa == 2
    assert config_from_dict(raw(run__G="cube", model__theta=0.3)).kappa == 1


def test_self_comparison_is_zero():
    cfg = config_from_dict(raw(run__r_grid=[25]))
    from noncentral.seeding import derive_seed

    seeds = replicate_seeds(derive_seed(cfg.master_seed, 1, 0), cfg.n_replicates)
    x_r = functional_batch(cfg, 25.0, seeds)[2]
    recs, _, _ = run_convergence(cfg, reference=SampleBatch(x_r, seeds))
    assert recs[0].ks_distance == 0.0


def _write(tmp_path, name, text=TOML):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_end_to_end_determinism_and_workers(tmp_path):
    path = _write(tmp_path, "exp.toml")
    outs = []
    for tag, workers in (("a", 1), ("b", 1), ("c", 2)):
        cfg = load_config(path)
        recs, ref, rows = run_convergence(cfg, workers=workers)
        out = tmp_path / tag
        write_convergence(str(out), recs, ref, rows, cfg)
        table = run_concentration(cfg, [0.1, 0.3, 1.0], workers=workers, reference=ref)
        write_concentration(str(out), table)
        outs.append(out)
    names = ["convergence.csv", "limit_samples.csv", "limit_samples.json", "functionals.csv",
             "concentration.csv", "concentration_summary.json"]
    for other in outs[1:]:
        match, mismatch, errors = filecmp.cmpfiles(outs[0], other, names, shallow=False)
        assert mismatch == [] and errors == []
    rows = read_csv(os.path.join(outs[0], "convergence.csv"))
    assert list(rows[0]) == ["r", "n", "ks_distance", "dkw_band", "var_xr", "var_exact", "seed"]
    assert len(rows) == 2 and all(0 <= float(r["ks_distance"]) <= 1 for r in rows)
    conc = read_csv(os.path.join(outs[0], "concentration.csv"))
    assert list(conc[0]) == ["epsilon", "q_hat", "cw_bound"] and len(conc) == 3
    fun = read_csv(os.path.join(outs[0], "functionals.csv"))
    assert list(fun[0]) == ["replicate", "r", "k_r", "k_r_kappa", "x_r_kappa", "seed"]
    assert len(fun) == 600


def test_concentration_table_shape():
    cfg = config_from_dict(raw(limit__n_samples=2000))
    table = run_concentration(cfg, [0.1, 0.3, 1.0])
    assert len(table.rows) == 3
    assert all(0 <= q <= 1 and b > 0 for _, q, b in table.rows)
    assert table.dominated
    assert 0.5 < table.exponent < 1.3


def test_kappa1_convergence_is_fast():
    cfg = config_from_dict(raw(run__G="H1", model__theta=0.25, run__r_grid=[100],
                               run__n_replicates=1000))
    recs, ref, _ = run_convergence(cfg)
    assert recs[0].ks_distance < 2 * dkw_band(1000)
    assert recs[0].var_xr == pytest.approx(recs[0].var_exact, rel=0.15)
