from math import factorial, sqrt

import numpy as np
import pytest
from scipy import stats

from noncentral.errors import CutoffTooSmall, HermitianViolation, OutOfRange, UnsupportedOrder
from noncentral.fields import c2
from noncentral.geometry import ball, cube, kernel_pair_integral
from noncentral.limit import (
    LimitConfig,
    TensorKernel,
    kernel_norm_sq,
    limit_variance,
    limit_variance_spectral,
    sample_limit,
    sample_limit_tensor,
    sample_limit_wick,
    tensor_cells,
    wick_kernel,
)
from noncentral.metrics import dkw_band, kolmogorov_one_sample, kolmogorov_two_sample


def cfg(kappa, alpha, method="wick", n=5000, seed=0, **kw):
    return LimitConfig.default(kappa, 1, alpha, cube(1), method, n, seed, **kw)


def test_limit_variance_examples():
    assert limit_variance(cfg(1, 0.5)) == pytest.approx(2.6666667, abs=1e-7)
    assert limit_variance(cfg(2, 0.3)) == pytest.approx(7.1428571, abs=1e-7)


@pytest.mark.parametrize("c", [
    LimitConfig.default(1, 1, 0.5),
    LimitConfig.default(2, 1, 0.3),
    LimitConfig.default(1, 2, 0.5, ball(2)),
    LimitConfig.default(1, 1, 0.4, ball(1)),
])
def test_spatial_and_spectral_forms_agree(c):
    assert limit_variance_spectral(c) == pytest.approx(limit_variance(c), rel=1e-2)
    scale = factorial(c.kappa) * c2(c.d, c.alpha) ** c.kappa
    assert scale * kernel_norm_sq(c) == pytest.approx(limit_variance(c), rel=1e-12)


def test_kernel_norm_against_frequency_quadrature():
    # the two-fold frequency integral computed directly on the line
    c = cfg(2, 0.3)
    assert kernel_norm_sq(c) == pytest.approx(kernel_pair_integral(cube(1), 0.3, 0.3, 400.0), rel=1e-3)


def test_config_validation():
    with pytest.raises(OutOfRange):
        cfg(2, 0.5)
    with pytest.raises(CutoffTooSmall):
        LimitConfig(1, 1, 0.5, cube(1), 10.0, 1.0)
    with pytest.raises(OutOfRange):
        LimitConfig(1, 1, 0.5, cube(1), 100.0, 1.0, method="series")
    with pytest.raises(CutoffTooSmall):
        sample_limit(LimitConfig(1, 1, 0.5, cube(1), 40.0, 1.0, n_samples=4))


def test_wick_lattice_variance_is_exact_at_every_cutoff():
    # Var of h^d sum sigma^k H_k(Z/sigma) is k! h^(2d) sum C_ij^k
    for cut in (100 * np.pi, 200 * np.pi, 400 * np.pi):
        c = cfg(2, 0.3, cutoff=cut)
        ker = wick_kernel(c)
        C = ker.factor @ ker.factor.T
        var = 2 * ker.h**2 * np.sum(C**2)
        assert var == pytest.approx(limit_variance(c), rel=1e-6)


def test_reproducible_batches():
    a = sample_limit(cfg(2, 0.3, n=600, seed=4))
    b = sample_limit(cfg(2, 0.3, n=600, seed=4))
    c = sample_limit(cfg(2, 0.3, n=600, seed=5))
    assert np.array_equal(a.values, b.values) and not np.array_equal(a.values, c.values)
    # a prefix of a longer run reproduces the shorter run
    d = sample_limit(cfg(2, 0.3, n=900, seed=4))
    assert np.array_equal(d.values[:600], a.values)


def test_worker_count_does_not_change_samples():
    one = sample_limit(cfg(2, 0.3, "tensor", n=800, seed=8), workers=1)
    two = sample_limit(cfg(2, 0.3, "tensor", n=800, seed=8), workers=2)
    assert np.array_equal(one.values, two.values)


def test_wick_kappa1_variance_and_gaussianity():
    b = sample_limit_wick(cfg(1, 0.5, n=5000, seed=1))
    x = b.values
    assert np.var(x) == pytest.approx(2.6666667, rel=0.05)
    z = (x - x.mean()) / x.std()
    assert kolmogorov_one_sample(z, stats.norm.cdf).statistic < dkw_band(len(z))


@pytest.mark.parametrize("kappa, alpha, method", [
    (1, 0.5, "wick"), (2, 0.3, "wick"), (3, 0.2, "wick"),
    (1, 0.5, "tensor"), (2, 0.3, "tensor"), (3, 0.2, "tensor"),
])
def test_mean_zero(kappa, alpha, method):
    x = sample_limit(cfg(kappa, alpha, method, n=4000, seed=20 + kappa)).values
    assert abs(x.mean()) < 3 * x.std(ddof=1) / sqrt(len(x))


@pytest.mark.parametrize("method", ["wick", "tensor"])
def test_kappa2_variance(method):
    # 40000 samples bring the standard error of the variance down to about 2%
    x = sample_limit(cfg(2, 0.3, method, n=40000, seed=11)).values
    assert np.var(x) == pytest.approx(7.1428571, rel=0.05)


def test_cross_sampler_agreement():
    w = sample_limit(cfg(2, 0.3, "wick", n=5000, seed=12)).values
    t = sample_limit(cfg(2, 0.3, "tensor", n=5000, seed=13)).values
    assert kolmogorov_two_sample(w, t).statistic < dkw_band(5000)
    w1 = sample_limit(cfg(1, 0.5, "wick", n=5000, seed=14)).values
    t1 = sample_limit(cfg(1, 0.5, "tensor", n=5000, seed=15)).values
    assert kolmogorov_two_sample(w1, t1).statistic < dkw_band(5000)


def test_tensor_zero_noise_gives_zero():
    for kappa, alpha in ((1, 0.5), (2, 0.3), (3, 0.2)):
        ker = TensorKernel(cfg(kappa, alpha, "tensor", n=1))
        z = ker.zeta(np.zeros((2, ker.M)), np.zeros((2, ker.M)))
        assert np.all(ker.contract(z) == 0)
        if kappa == 2:
            assert np.all(ker.real_quadratic(np.zeros((2, ker.M)), np.zeros((2, ker.M))) == 0)


def test_tensor_contraction_matches_brute_force():
    c = LimitConfig(3, 1, 0.2, cube(1), 4.0, 0.125, "tensor", 1, 0, 0.05)
    ker = TensorKernel(c)
    rng = np.random.default_rng(0)
    z = ker.zeta(rng.standard_normal((1, ker.M)), rng.standard_normal((1, ker.M)))[0]
    brute = np.einsum("ijk,i,j,k->", ker.T, z, z, z)
    assert ker.contract(z[None, :])[0] == pytest.approx(brute, rel=1e-10)
    assert abs(brute.imag) < 1e-8 * abs(brute.real)


def test_tensor_real_form_matches_complex_contraction():
    ker = TensorKernel(cfg(2, 0.3, "tensor", n=1))
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal((3, ker.M)), rng.standard_normal((3, ker.M))
    direct = ker.contract(ker.zeta(a, b))
    np.testing.assert_allclose(direct.real, ker.real_quadratic(a, b), rtol=1e-9)
    assert np.max(np.abs(direct.imag)) < 1e-8 * np.max(np.abs(direct.real))


def test_tensor_diagonal_excluded():
    ker = TensorKernel(LimitConfig(2, 1, 0.3, cube(1), 8.0, 0.25, "tensor", 1, 0, 0.05))
    M = ker.M
    for m in range(M):
        assert ker.T[m, m] == 0 and ker.T[m, m + M] == 0 and ker.T[m + M, m] == 0


def test_hermitian_violation_detected(monkeypatch):
    from noncentral import limit

    c = cfg(3, 0.2, "tensor", n=8)
    ker = limit.tensor_kernel(c)
    monkeypatch.setattr(ker, "zeta", lambda a, b: np.concatenate([a + 1j * b, a + 1j * b], axis=-1))
    with pytest.raises(HermitianViolation):
        sample_limit_tensor(c)


def test_tensor_limits():
    with pytest.raises(UnsupportedOrder):
        TensorKernel(LimitConfig(4, 1, 0.2, cube(1), 20.0, 0.5, "tensor"))
    with pytest.raises(UnsupportedOrder):
        sample_limit_tensor(LimitConfig(1, 2, 0.5, ball(2), 20.0, 0.5, "tensor"))


def test_tensor_cells_cover_band():
    lam, mass = tensor_cells(0.3, 100.0, 0.25, 0.002)
    assert mass.sum() == pytest.approx(c2(1, 0.3) * 100.0**0.3 / 0.3, rel=1e-12)
    assert np.all(mass <= 0.002 + 1e-15) and np.all(np.diff(lam) > 0)


def test_cutoff_convergence_of_captured_variance():
    c1 = cfg(2, 0.3, "tensor", n=1)
    c2x = cfg(2, 0.3, "tensor", n=1, cutoff=200.0)
    v1 = TensorKernel(c1).captured_variance
    v2 = TensorKernel(c2x).captured_variance
    assert abs(v2 - v1) / v2 < 0.03
    assert v1 < v2 < limit_variance(c1)


def test_cutoff_convergence_of_sample_variance():
    # wick output at cutoffs L and 2L, common seeds
    a = sample_limit(cfg(2, 0.3, n=20000, seed=30, cutoff=200 * np.pi)).values
    b = sample_limit(cfg(2, 0.3, n=20000, seed=30, cutoff=400 * np.pi)).values
    assert abs(np.var(a) - np.var(b)) / np.var(b) < 0.03


def test_kappa2_is_right_skewed():
    x = sample_limit(cfg(2, 0.3, "tensor", n=5000, seed=40)).values
    skew = stats.skew(x)
    rng = np.random.default_rng(41)
    boot = np.array([stats.skew(rng.choice(x, len(x))) for _ in range(200)])
    assert skew > 0 and np.quantile(boot, 0.005) > 0
