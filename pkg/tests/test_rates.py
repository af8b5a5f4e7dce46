from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from noncentral.errors import DegenerateGrid, NonPositiveInput, NonPositiveValue, OutOfRange, TauTooNegative
from noncentral.rates import (
    default_a,
    effective_tau,
    fit_rate,
    harmonic_term,
    kappa1,
    optimal_partition,
    rate_bound,
)


def test_kappa1_examples():
    assert kappa1(3, 1, 2, -1) == pytest.approx(2 / 3, abs=1e-12)
    assert kappa1(2, 0.5, 2, -0.2) == pytest.approx(0.4, abs=1e-12)
    assert kappa1(2, 0.5, 2, -1e-9) == pytest.approx(2e-9)
    with pytest.raises(OutOfRange):
        kappa1(2, 0.5, 2, 0.0)
    with pytest.raises(OutOfRange):
        kappa1(2, 1.5, 2, -0.1)


def test_kappa1_single_term_for_rank_one():
    assert harmonic_term(2, 0.5, 1) == pytest.approx(2 + 1 - 0.5)


def test_rate_bound_examples():
    rb = rate_bound(2, 0.5, 2, -0.2, 1)
    assert rb.branch == "tau_negative" and abs(rb.sup_exponent - 1 / 9) < 1e-12
    assert rb.alpha_term == pytest.approx(1 / 3)
    # tau = -1 lies below -(d - k alpha)/2 = -1/2; clamping keeps the value
    with pytest.raises(TauTooNegative):
        rate_bound(3, 1, 2, -1, 1)
    rb = rate_bound(3, 1, 2, -1, 1, clamp_tau=True)
    assert abs(rb.sup_exponent - 1 / 6) < 1e-12
    assert rb.alpha_term == pytest.approx(0.5) and rb.kappa1 == pytest.approx(2 / 3)


@pytest.mark.parametrize("d, alpha, kappa", [(1, 0.3, 2), (2, 0.5, 3), (3, 1.0, 2), (1, 0.5, 1)])
def test_tau_zero_branch(d, alpha, kappa):
    rb = rate_bound(d, alpha, kappa, 0.0)
    assert rb.branch == "tau_zero" and rb.g_power == 2 / 3
    assert rb.sup_exponent is None and rb.kappa1 is None


def test_rate_bound_errors():
    with pytest.raises(OutOfRange):
        rate_bound(1, 0.6, 2, -0.1)
    with pytest.raises(OutOfRange):
        rate_bound(1, 0.3, 2, 0.1)
    with pytest.raises(OutOfRange):
        rate_bound(1, 0.3, 2, -0.1, a=1.5)
    with pytest.raises(OutOfRange):
        rate_bound(1, 0.3, 2, -0.1, a=0.0)


def test_default_a():
    assert default_a(1) == default_a(2) == 1.0
    assert default_a(3) == pytest.approx(1 / 3)
    assert rate_bound(2, 0.5, 3, -0.1).a == pytest.approx(1 / 3)


def test_effective_tau():
    assert effective_tau(1, 0.3, 2, -2.0) == pytest.approx(-0.2, abs=1e-8)
    assert effective_tau(1, 0.3, 2, -0.1) == -0.1
    assert effective_tau(1, 0.3, 2, 0.0) == 0.0


def _lattice():
    for d, kappa in product((1, 2, 3), (1, 2, 3)):
        for frac in (0.2, 0.5, 0.8):
            alpha = frac * d / kappa
            lo = -(d - kappa * alpha) / 2
            yield d, alpha, kappa, [lo * f for f in (0.9, 0.6, 0.3, 0.05)]


def test_monotone_in_a_and_tau():
    for d, alpha, kappa, taus in _lattice():
        for tau in taus:
            vals = [rate_bound(d, alpha, kappa, tau, a).sup_exponent for a in (0.1, 0.3, 0.6, 1.0)]
            assert all(y >= x for x, y in zip(vals[:-1], vals[1:]))
            assert vals[0] > 0
        # taus are ordered towards 0 from below
        sups = [rate_bound(d, alpha, kappa, t, 1.0).sup_exponent for t in taus]
        assert all(y <= x + 1e-15 for x, y in zip(sups[:-1], sups[1:]))


@pytest.mark.parametrize("d, kappa", [(1, 2), (2, 2), (3, 3)])
def test_boundary_vanishes(d, kappa):
    edge = d / kappa
    seq = [rate_bound(d, edge * (1 - h), kappa, -(d - kappa * edge * (1 - h)) / 4, 1).sup_exponent
           for h in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(y < x for x, y in zip(seq[:-1], seq[1:])) and seq[-1] < 1e-3


@pytest.mark.parametrize("alpha, kappa, tau, a", [(0.5, 2, -0.2, 1.0), (0.8, 3, -0.1, 1 / 3),
                                                  (0.3, 2, -0.05, 0.5), (1.5, 1, -0.4, 1.0)])
def test_large_d_limit(alpha, kappa, tau, a):
    rb = rate_bound(1000, alpha, kappa, tau, a)
    assert abs(rb.sup_exponent - a / (2 + a) * min(alpha, -2 * tau)) < 1e-3


def test_partition_examples():
    diffs, val = optimal_partition(1, [1, 1])
    np.testing.assert_allclose(diffs, [0.5, 0.5])
    assert val == 0.5
    diffs, val = optimal_partition(1, [1, 2])
    np.testing.assert_allclose(diffs, [2 / 3, 1 / 3])
    assert val == pytest.approx(2 / 3)
    # x = (d - 2 alpha, d + 1 - k alpha) for d = 3, alpha = 1, k = 2
    assert optimal_partition(1, [1, 2])[1] == pytest.approx(harmonic_term(3, 1, 2))
    with pytest.raises(NonPositiveInput):
        optimal_partition(0, [1])
    with pytest.raises(NonPositiveInput):
        optimal_partition(1, [1, -1])


def _brute_partition(b, x):
    # max over the simplex of min_i d_i x_i; the objective is concave and
    # piecewise linear, so a linear program gives the exact optimum
    from scipy.optimize import linprog

    n = len(x)
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-np.diag(x), np.ones((n, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=[[1.0] * n + [0.0]], b_eq=[b],
                  bounds=[(0, None)] * n + [(None, None)], method="highs")
    return -res.fun


def _grid_partition(b, x, step=1e-3):
    # direct search over the simplex for n = 2 and n = 3
    best = 0.0
    g = np.arange(0, 1 + step / 2, step)
    if len(x) == 2:
        return float(np.max(np.minimum(g * b * x[0], (1 - g) * b * x[1])))
    for u in g:
        v = g[g <= 1 - u + 1e-12]
        w = 1 - u - v
        best = max(best, float(np.max(np.minimum.reduce([u * b * x[0] + 0 * v, v * b * x[1], w * b * x[2]]))))
    return best


def test_partition_against_brute_force():
    rng = np.random.default_rng(2024)
    for _ in range(50):
        n = int(rng.integers(1, 6))
        b = float(rng.uniform(0.05, 2.0))
        x = rng.uniform(0.05, 5.0, n)
        diffs, val = optimal_partition(b, x)
        assert abs(val - _brute_partition(b, x)) < 1e-6
        assert diffs.sum() == pytest.approx(b) and np.allclose(diffs * x, val)


def test_partition_against_grid_search():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(2, 4))
        b = float(rng.uniform(0.1, 2.0))
        x = rng.uniform(0.2, 3.0, n)
        val = optimal_partition(b, x)[1]
        assert _grid_partition(b, x) <= val + 1e-12
        assert val - _grid_partition(b, x) < 0.01 * val


@settings(max_examples=100, deadline=None)
@given(b=st.floats(0.01, 2), x=st.lists(st.floats(0.01, 10), min_size=1, max_size=5),
       w=st.lists(st.floats(0.0, 1.0), min_size=5, max_size=5))
def test_partition_is_a_maximum(b, x, w):
    # no other partition of b does better
    val = optimal_partition(b, x)[1]
    w = np.asarray(w[: len(x)]) + 1e-9
    other = b * w / w.sum()
    assert np.min(other * np.asarray(x)) <= val * (1 + 1e-9)


def test_fit_rate_examples():
    r = np.array([25.0, 50, 100, 200])
    s, c, res = fit_rate(r, 1 / r)
    assert s == pytest.approx(-1.0) and res < 1e-12
    s, c, res = fit_rate(r, 3 * r**-0.5)
    assert s == pytest.approx(-0.5) and c == pytest.approx(np.log(3))


def test_fit_rate_noisy():
    rng = np.random.default_rng(0)
    r = np.array([25.0, 50, 100, 200, 400])
    for _ in range(100):
        s = fit_rate(r, r**-0.5 * (1 + rng.uniform(-0.1, 0.1, r.size)))[0]
        assert abs(s + 0.5) < 0.15


def test_fit_rate_errors():
    with pytest.raises(DegenerateGrid):
        fit_rate([1, 2], [1, 2])
    with pytest.raises(DegenerateGrid):
        fit_rate([2, 2, 2], [1, 2, 3])
    with pytest.raises(NonPositiveValue):
        fit_rate([1, 2, 3], [1, 0, 1])
