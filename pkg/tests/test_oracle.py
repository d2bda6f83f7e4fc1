import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate, stats

from blocksamp.blocks import EmpiricalDist
from blocksamp.errors import ConfigError, QuadratureError
from blocksamp.oracle import (
    HermiteSpec,
    exact_norm_sq,
    hermite_norm_sq,
    ks_distance,
    linear_sum_variance,
    normal_cdf,
    sample_limit,
    sample_volterra,
    volterra_sum,
    zeta,
)
from blocksamp.process import CoefficientSeq

from conftest import brute_volterra, partial_sum_variance


def _coeffs(beta, m):
    return CoefficientSeq(beta, 1.0, m, tail_tol=None)


def test_volterra_memoryless_cases():
    eps = np.array([0.5, -1.25, 2.0, 0.75])
    c = _coeffs(0.8, 0)
    assert volterra_sum(1, c, eps, 4) == pytest.approx(eps.sum(), rel=1e-15)
    assert volterra_sum(2, c, eps, 4) == 0.0


def test_volterra_single_step_order_two():
    # n = 1, M = 1: U_1 = a_0 a_1 eps_1 eps_0
    c = _coeffs(0.7, 1)
    eps = np.array([1.5, -2.0])
    assert volterra_sum(2, c, eps, 1) == pytest.approx(2.0**-0.7 * 1.5 * -2.0, rel=1e-14)


@pytest.mark.parametrize("r", [1, 2])
def test_volterra_matches_enumeration_exhaustive(r):
    rng = np.random.default_rng(7)
    for n in range(1, 9):
        for m in range(0, 9):
            c = _coeffs(0.65, m)
            eps = rng.standard_normal(n + m)
            got = volterra_sum(r, c, eps, n)
            want = brute_volterra(r, c.array(), eps, n)
            assert got == pytest.approx(want, rel=1e-8, abs=1e-12), (n, m)


@given(st.floats(0.51, 3.0), st.integers(1, 6), st.integers(0, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_volterra_matches_enumeration_random(beta, n, m, seed):
    c = _coeffs(beta, m)
    eps = np.random.default_rng(seed).standard_normal(n + m)
    for r in (1, 2):
        assert volterra_sum(r, c, eps, n) == pytest.approx(
            brute_volterra(r, c.array(), eps, n), rel=1e-8, abs=1e-10
        )


def test_volterra_rejects_unsupported_order_and_length():
    c = _coeffs(0.7, 2)
    with pytest.raises(ConfigError):
        volterra_sum(3, c, np.zeros(5), 3)
    with pytest.raises(ValueError):
        volterra_sum(1, c, np.zeros(4), 3)


@pytest.mark.parametrize("r,beta", [(3, 0.6), (1, 0.5), (1, 1.0), (2, 0.75), (2, 0.8)])
def test_hermite_spec_window(r, beta):
    with pytest.raises(ConfigError):
        HermiteSpec(r, beta)


def test_hermite_spec_H():
    assert HermiteSpec(1, 0.75).H == 0.75
    assert HermiteSpec(2, 0.6).H == pytest.approx(0.8)


@pytest.mark.parametrize("beta,m,n", [(0.6, 50, 30), (0.75, 0, 10), (1.5, 200, 64)])
def test_exact_norm_linear(beta, m, n):
    c = _coeffs(beta, m)
    assert exact_norm_sq(1, c, n) == pytest.approx(partial_sum_variance(c.array(), 1.0, n), rel=1e-10)
    assert exact_norm_sq(1, c, n, eps_var=3.0) == pytest.approx(
        3.0 * partial_sum_variance(c.array(), 1.0, n), rel=1e-10
    )


@pytest.mark.parametrize("beta,m,n", [(0.6, 12, 9), (0.7, 0, 5), (0.55, 25, 20)])
def test_exact_norm_quadratic(beta, m, n):
    # T = sum_{s<t} W_st eps_s eps_t with W_st = sum_i a_{i-s} a_{i-t}; E T^2 = sum_{s<t} W_st^2
    a = _coeffs(beta, m).array()
    pos = range(1 - m, n + 1)
    coef = lambda k: a[k] if 0 <= k <= m else 0.0
    total = 0.0
    for s in pos:
        for t in pos:
            if s < t:
                w = sum(coef(i - s) * coef(i - t) for i in range(1, n + 1))
                total += w * w
    assert exact_norm_sq(2, _coeffs(beta, m), n) == pytest.approx(total, rel=1e-10)
    assert exact_norm_sq(2, _coeffs(beta, m), n, eps_var=2.0) == pytest.approx(4 * total, rel=1e-10)


def test_linear_sum_variance_truncated_matches_direct():
    c = _coeffs(0.7, 300)
    got = linear_sum_variance(0.7, 40, truncation=300, untruncated=False)
    assert got == pytest.approx(partial_sum_variance(c.array(), 1.0, 40), rel=1e-10)


def test_linear_sum_variance_tail_correction():
    # the tail-corrected value is stable in the truncation point
    a = linear_sum_variance(0.75, 100, truncation=2_000)
    b = linear_sum_variance(0.75, 100, truncation=2_000_000)
    assert a == pytest.approx(b, rel=1e-8)
    assert a > linear_sum_variance(0.75, 100, truncation=20_000, untruncated=False)


def test_limit_order_one_is_gaussian():
    reps = 10_000
    d = sample_limit(HermiteSpec(1, 0.75, n=500, truncation=2000), reps, seed=5)
    dist = ks_distance(d, normal_cdf)
    assert dist <= 0.02
    # the normalized sum is exactly N(0, 1) here, so the Kolmogorov law applies
    assert stats.kstwobign.sf(dist * math.sqrt(reps)) > 1e-3
    assert np.var(d.values) == pytest.approx(1.0, abs=0.05)


def test_limit_order_two_is_right_skewed():
    spec = HermiteSpec(2, 0.6, n=500, truncation=2000)
    v = sample_volterra(spec, 20_000, seed=5) / math.sqrt(exact_norm_sq(2, spec.coeffs(), spec.n))
    skews = np.array([stats.skew(b) for b in v.reshape(20, -1)])
    se = skews.std(ddof=1) / math.sqrt(skews.size)
    assert skews.mean() > 3 * se
    assert np.var(v) == pytest.approx(1.0, abs=0.05)


def test_sample_limit_single_draw_and_determinism():
    spec = HermiteSpec(2, 0.65, n=50, truncation=100)
    d = sample_limit(spec, 1, seed=3)
    assert d.m == 1
    assert np.array_equal(sample_limit(spec, 40, seed=3).values, sample_limit(spec, 40, seed=3).values)
    with pytest.raises(ValueError):
        sample_limit(spec, 0, seed=3)


def _mp_closed_form(r, beta):
    beta = mpmath.mpf(beta)
    d = r * (2 * beta - 1)
    return mpmath.beta(1 - beta, 2 * beta - 1) ** r / mpmath.factorial(r) * 2 / ((1 - d) * (2 - d))


@pytest.mark.parametrize("r,beta", [(1, 0.55), (1, 0.75), (1, 0.9), (2, 0.6), (2, 0.7)])
def test_zeta_matches_closed_form(r, beta):
    z = zeta(r, beta)
    assert z.value > 0
    assert z.value == pytest.approx(float(_mp_closed_form(r, beta)), rel=1e-6)
    assert hermite_norm_sq(r, beta) == pytest.approx(float(_mp_closed_form(r, beta)), rel=1e-12)


def test_zeta_order_two_against_monte_carlo():
    # importance sampling over (1 - u2, u2 - u1) with heavy-tailed proposals
    beta, k, reps = 0.6, 3.0, 40_000
    rng = np.random.default_rng(2)
    w = rng.random((reps, 2))
    z = (w / (1 - w)) ** k
    root = z ** (1 / k)
    dens = ((1 / k) * z ** (1 / k - 1) / (1 + root) ** 2).prod(axis=1)

    def kernel(u1, u2):
        if u2 > 0:
            f = lambda x: (x + u2 - u1) ** (-beta)
            return integrate.quad(f, 0.0, 1 - u2, weight="alg", wvar=(-beta, 0.0), limit=200)[0]
        f = lambda v: (v - u1) ** (-beta) * (v - u2) ** (-beta)
        return integrate.quad(f, 0.0, 1.0, limit=200)[0]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        vals = np.array([kernel(1 - a - b, 1 - a) ** 2 for a, b in z]) / dens
    est, se = vals.mean(), vals.std() / math.sqrt(reps)
    got = zeta(2, beta, tol=1e-4)
    assert abs(got.value - est) <= 3 * se, f"quadrature {got.value:.4f}, MC {est:.4f} +- {se:.4f}"


def test_zeta_is_unimodal_in_beta():
    # zeta(1, .) falls then rises; check monotonicity on either side of the analytic minimizer
    dlog = lambda b: mpmath.diff(lambda x: mpmath.log(_mp_closed_form(1, x)), b)
    b_star = float(mpmath.findroot(dlog, 0.65))
    assert 0.55 < b_star < 0.75
    left = np.linspace(0.52, b_star - 0.005, 8)
    right = np.linspace(b_star + 0.005, 0.98, 12)
    zl = [zeta(1, b).value for b in left]
    zr = [zeta(1, b).value for b in right]
    assert all(np.diff(zl) < 0)
    assert all(np.diff(zr) > 0)


def test_zeta_errors():
    with pytest.raises(ConfigError):
        zeta(2, 0.8)
    with pytest.raises(ConfigError):
        zeta(3, 0.6)
    with pytest.raises(ValueError):
        zeta(1, 0.7, tol=0.0)
    with pytest.raises(QuadratureError) as info:
        zeta(2, 0.6, tol=1e-14)
    assert info.value.best_estimate == pytest.approx(hermite_norm_sq(2, 0.6), rel=1e-6)


def test_normal_cdf_values():
    assert normal_cdf(0.0) == 0.5
    assert normal_cdf(1.96) == pytest.approx(float(mpmath.ncdf(1.96)), abs=1e-10)
    assert normal_cdf(1.96) == pytest.approx(0.9750021048517795, abs=1e-10)
    x = np.linspace(-6, 6, 41)
    assert np.allclose(normal_cdf(x) + normal_cdf(-x), 1.0, atol=1e-15)


def test_ks_distance_examples():
    d = EmpiricalDist(np.array([0.2, 0.4, 0.6, 0.8, 1.0]))
    assert ks_distance(d, d) == 0.0
    assert ks_distance(EmpiricalDist([0.0]), normal_cdf) == 0.5
    uniform = lambda x: np.clip(x, 0.0, 1.0)
    assert ks_distance(d, uniform) == pytest.approx(0.2, abs=1e-15)


samples = arrays(float, st.integers(1, 30), elements=st.floats(-5, 5))


@given(samples, samples, samples)
@settings(max_examples=100)
def test_ks_distance_is_a_metric(x, y, z):
    dx, dy, dz = EmpiricalDist(x), EmpiricalDist(y), EmpiricalDist(z)
    assert 0.0 <= ks_distance(dx, dy) <= 1.0
    assert ks_distance(dx, dy) == ks_distance(dy, dx)
    assert ks_distance(dx, dz) <= ks_distance(dx, dy) + ks_distance(dy, dz) + 1e-12
