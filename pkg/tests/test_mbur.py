import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from unitfit import mbur
from unitfit.errors import DomainError

ALPHAS = [0.1, 0.5, 0.668, 1.0, 1.5, 2.0, 2.5, 5.0]
alphas = st.floats(0.2, 4.0)
probs = st.floats(1e-6, 1 - 1e-6)


def ref_pdf(a, y):
    # written out directly from the density, independent of the module
    return 6.0 / a**2 * (1.0 - y ** (1 / a**2)) * y ** (2 / a**2 - 1)


def quad01(f, points=None):
    return integrate.quad(f, 0, 1, limit=500, epsabs=1e-13, epsrel=1e-12, points=points)[0]


# ------------------------------------------------------------------ oracles

@pytest.mark.parametrize("a, y, expected", [
    (0.5, 0.5, 0.17578125),
    (2.0, 0.5, 0.3375096711),
    (1.0, 0.5, 1.5),
])
def test_pdf_values(a, y, expected):
    assert mbur.pdf(a, y) == pytest.approx(expected, abs=1e-9)
    assert mbur.pdf(a, y) == pytest.approx(ref_pdf(a, y), rel=1e-13)


@pytest.mark.parametrize("a, y, expected", [(1.0, 0.25, 0.15625), (2.0, 0.0625, 0.5)])
def test_cdf_values(a, y, expected):
    assert mbur.cdf(a, y) == pytest.approx(expected, abs=1e-12)
    assert mbur.sf(a, y) == pytest.approx(1 - expected, abs=1e-12)


def test_alpha_one_is_polynomial():
    y = np.linspace(0.01, 0.99, 41)
    np.testing.assert_allclose(mbur.pdf(1.0, y), 6 * y * (1 - y), rtol=1e-13)
    np.testing.assert_allclose(mbur.cdf(1.0, y), 3 * y**2 - 2 * y**3, rtol=1e-13)


def test_generalized_beta_case():
    # alpha^2 = 0.1: c = 10, density 60 (1 - y^10) y^19
    y = np.linspace(0.05, 0.95, 19)
    np.testing.assert_allclose(mbur.pdf(math.sqrt(0.1), y), 60 * (1 - y**10) * y**19, rtol=1e-11)


def test_invalid_arguments():
    with pytest.raises(DomainError):
        mbur.pdf(0.0, 0.5)
    with pytest.raises(DomainError):
        mbur.pdf(-1.0, 0.5)
    with pytest.raises(DomainError):
        mbur.cdf(1.0, 1.5)
    with pytest.raises(DomainError):
        mbur.quantile(1.0, 1.2)


def test_tail_survival_is_accurate():
    # 1 - F would cancel; the direct form keeps relative accuracy
    a, y = 1.0, 1 - 1e-9
    eps = 1 - y
    exact = 3 * eps**2 - 2 * eps**3
    assert mbur.sf(a, y) == pytest.approx(exact, rel=1e-6)


# ------------------------------------------------------------ normalization

@pytest.mark.parametrize("a", ALPHAS)
def test_pdf_normalizes(a):
    split = mbur.mode(a)
    total = mbur.quad_unit(lambda y: float(mbur.pdf(a, y)), split, epsabs=1e-13, epsrel=1e-12)
    assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("a", ALPHAS)
def test_cdf_is_integral_of_pdf(a):
    for y in (0.1, 0.4, 0.8):
        val = integrate.quad(lambda x: float(mbur.pdf(a, x)), 0, y, limit=500, epsabs=1e-13)[0]
        assert mbur.cdf(a, y) == pytest.approx(val, abs=1e-9)


@given(alphas, probs)
def test_quantile_round_trip(a, u):
    q = mbur.quantile(a, u)
    assert 0 <= q <= 1
    assert mbur.cdf(a, q) == pytest.approx(u, abs=1e-10)


@pytest.mark.parametrize("a", ALPHAS)
def test_quantile_round_trip_grid(a):
    u = np.linspace(1e-4, 1 - 1e-4, 201)
    q = mbur.quantile(a, u)
    ok = q > 1e-300
    np.testing.assert_allclose(mbur.cdf(a, q[ok]), u[ok], atol=1e-10)


def test_quantile_endpoints_and_median():
    assert mbur.quantile(1.0, 0.0) == 0.0
    assert mbur.quantile(1.0, 1.0) == 1.0
    assert mbur.quantile(1.0, 0.5) == pytest.approx(0.5, abs=1e-14)
    # median of Y is exp(-m^2), m the Rayleigh median: a^2 log 2 in the exponent
    assert mbur.quantile(2.0, 0.5) == pytest.approx(0.5**4, rel=1e-12)


def test_printed_cubic_form_agrees():
    u = np.linspace(0.001, 0.999, 99)
    np.testing.assert_allclose(mbur._cubic_root(u), mbur._cubic_root_printed(u), atol=1e-12)


@given(alphas, st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_cdf_monotone(a, y1, y2):
    lo, hi = sorted((y1, y2))
    assert mbur.cdf(a, lo) <= mbur.cdf(a, hi) + 1e-15


# ------------------------------------------------------------------ moments

def test_mean_examples():
    assert mbur.raw_moment(math.sqrt(2), 1) == pytest.approx(0.3, abs=1e-15)
    s = mbur.moment_summary(1.0)
    assert s.mean == pytest.approx(0.5)
    assert s.variance == pytest.approx(0.05, abs=1e-14)
    assert s.skewness == pytest.approx(0.0, abs=1e-12)
    assert s.kurtosis == pytest.approx(15 / 7, abs=1e-12)


@pytest.mark.parametrize("a, kurt", [(1.5, 2.91724), (0.668, 2.9021)])
def test_kurtosis_examples(a, kurt):
    assert mbur.moment_summary(a).kurtosis == pytest.approx(kurt, abs=1e-4)


@pytest.mark.parametrize("a", ALPHAS)
@pytest.mark.parametrize("r", [1, 2, 3, 4, 2.5])
def test_raw_moment_vs_quadrature(a, r):
    val = quad01(lambda y: y**r * ref_pdf(a, y))
    assert mbur.raw_moment(a, r) == pytest.approx(val, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_moment_summary_vs_quadrature(a):
    m = quad01(lambda y: y * ref_pdf(a, y))
    v = quad01(lambda y: (y - m) ** 2 * ref_pdf(a, y))
    s3 = quad01(lambda y: (y - m) ** 3 * ref_pdf(a, y)) / v**1.5
    k4 = quad01(lambda y: (y - m) ** 4 * ref_pdf(a, y)) / v**2
    s = mbur.moment_summary(a)
    assert (s.mean, s.variance) == pytest.approx((m, v), rel=1e-9)
    assert s.skewness == pytest.approx(s3, rel=1e-7, abs=1e-9)
    assert s.kurtosis == pytest.approx(k4, rel=1e-7)
    assert s.cv == pytest.approx(math.sqrt(v) / m, rel=1e-9)


def test_incomplete_moment():
    assert mbur.incomplete_moment(1.0, 1, 0.5) == pytest.approx(0.15625, abs=1e-14)
    for a in (0.5, 2.0):
        for r in (1, 2):
            t = 0.6
            val = integrate.quad(lambda y: y**r * ref_pdf(a, y), 0, t, epsabs=1e-13)[0]
            assert mbur.incomplete_moment(a, r, t) == pytest.approx(val, rel=1e-9)
    # full range recovers the raw moment
    assert mbur.incomplete_moment(2.0, 2, 1 - 1e-16) == pytest.approx(mbur.raw_moment(2.0, 2), rel=1e-9)


# -------------------------------------------------------- stress-strength

def test_stress_strength_example_and_identities():
    assert mbur.stress_strength(1.0, math.sqrt(2)) == pytest.approx(0.738095238, abs=1e-9)
    assert mbur.stress_strength(1.3, 1.3) == pytest.approx(0.5, abs=1e-14)


@given(alphas, alphas)
def test_stress_strength_complement(a1, a2):
    assert mbur.stress_strength(a1, a2) + mbur.stress_strength(a2, a1) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("a1, a2", [(0.5, 1.0), (1.0, 2.5), (2.0, 0.7)])
def test_stress_strength_vs_quadrature(a1, a2):
    # P(Y < X) = int f_X(x) F_Y(x) dx
    val = quad01(lambda x: ref_pdf(a1, x) * float(mbur.cdf(a2, x)))
    assert mbur.stress_strength(a1, a2) == pytest.approx(val, abs=1e-9)


def test_stress_strength_monte_carlo(rng):
    x = mbur.sample(0.8, 200_000, rng)
    y = mbur.sample(1.6, 200_000, rng)
    assert np.mean(y < x) == pytest.approx(mbur.stress_strength(0.8, 1.6), abs=0.005)


# ----------------------------------------------------- inequality measures

def test_inequality_examples():
    L, B = mbur.inequality_curves(1.0, 0.5)
    assert L == pytest.approx(0.3125, abs=1e-14)
    assert B == pytest.approx(0.625, abs=1e-14)
    assert mbur.gini(1.0) == pytest.approx(0.2, abs=1e-14)
    assert mbur.gini(math.sqrt(2)) == pytest.approx(-1 / 21, abs=1e-6)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_lorenz_is_scaled_incomplete_mean(a):
    for t in (0.2, 0.5, 0.9):
        L, B = mbur.inequality_curves(a, t)
        im = mbur.incomplete_moment(a, 1, t) / mbur.raw_moment(a, 1)
        assert L == pytest.approx(im, rel=1e-12)
        assert B == pytest.approx(im / mbur.cdf(a, t), rel=1e-12)


@pytest.mark.parametrize("a", [0.5, 1.0, math.sqrt(2), 2.0])
def test_gini_matches_integral_over_truncation_point(a):
    val = 1 - 2 * quad01(lambda t: float(mbur.inequality_curves(a, t).lorenz))
    assert mbur.gini(a) == pytest.approx(val, abs=1e-9)


# ------------------------------------------------------------------ entropy

@pytest.mark.parametrize("a, g, expected", [
    (1.0, 2, -0.18232156), (1.0, 3, -0.21681799), (1.0, 2.5, -0.2013964)])
def test_renyi_examples(a, g, expected):
    assert mbur.renyi_entropy(a, g) == pytest.approx(expected, abs=1e-7)


@pytest.mark.parametrize("a", [0.5, 1.0])
@pytest.mark.parametrize("g", [2, 3, 4])
def test_renyi_series_vs_quadrature(a, g):
    val = quad01(lambda y: ref_pdf(a, y) ** g, points=[mbur.mode(a)])
    assert mbur.renyi_integral_series(a, g) == pytest.approx(val, rel=1e-9)
    assert mbur.renyi_integral_quad(a, g) == pytest.approx(val, rel=1e-8)


@pytest.mark.parametrize("g", [2, 3, 4])
def test_renyi_diverges_for_large_alpha(g):
    # at alpha = 2 the density behaves like y^(-1/2) near 0, so f^g is not integrable
    with pytest.raises(DomainError):
        mbur.renyi_entropy(2.0, g)


def test_renyi_invalid_order():
    for g in (1, 0, -1):
        with pytest.raises(DomainError):
            mbur.renyi_entropy(1.0, g)


# ------------------------------------------------------ mean residual life

def test_mrl_example_and_limits():
    assert mbur.mean_residual_life(1.0, 0.5) == pytest.approx(0.1875, abs=1e-13)
    for a in (0.5, 1.0, 2.0):
        # int_0^y S = y - O(y F(y)), so near 0 the MRL is (E[Y] - y) / S(y)
        y0 = 1e-12
        expected = (mbur.raw_moment(a, 1) - y0) / mbur.sf(a, y0)
        assert mbur.mean_residual_life(a, y0) == pytest.approx(expected, rel=1e-9)
        assert mbur.mean_residual_life(a, 1 - 1e-7) == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5])
@pytest.mark.parametrize("y", [0.1, 0.5, 0.9, 0.999])
def test_mrl_vs_quadrature(a, y):
    S = lambda x: float(mbur.sf(a, x))
    val = integrate.quad(S, y, 1, epsabs=1e-14, epsrel=1e-12)[0] / S(y)
    assert mbur.mean_residual_life(a, y) == pytest.approx(val, rel=1e-8)


# ------------------------------------------------------------------- hazard

def test_hazard_regimes():
    y = np.linspace(0.02, 0.98, 97)
    # alpha <= 1: increasing hazard
    for a in (0.5, 1.0):
        assert np.all(np.diff(mbur.hazard(a, y)) > 0)
    # large alpha: bathtub, decreasing then increasing
    h = mbur.hazard(1.6, y)
    k = int(np.argmin(h))
    assert 0 < k < y.size - 1
    assert np.all(np.diff(h[: k + 1]) < 0) and np.all(np.diff(h[k:]) > 0)


def test_reliability_consistency():
    a, y = 1.7, np.array([0.1, 0.3, 0.7])
    r = mbur.reliability_functions(a, y)
    np.testing.assert_allclose(r.hazard * r.survival, mbur.pdf(a, y), rtol=1e-13)
    np.testing.assert_allclose(r.reversed_hazard * mbur.cdf(a, y), mbur.pdf(a, y), rtol=1e-13)


# ------------------------------------------------------------ PWM / order

@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("r", [0, 1, 2, 3])
@pytest.mark.parametrize("s", [0, 1, 2, 3])
def test_pwm_vs_quadrature(a, r, s):
    val = quad01(lambda y: y**r * float(mbur.cdf(a, y)) ** s * ref_pdf(a, y))
    assert mbur.pwm(a, r, s) == pytest.approx(val, rel=1e-8, abs=1e-12)


def test_pwm_example():
    assert mbur.pwm(1.0, 1, 1) == pytest.approx(0.3142857143, abs=1e-10)


def test_order_statistics():
    spec = mbur.OrderStatSpec(2, 2)
    assert mbur.order_statistic_pdf(1.0, spec, 0.5) == pytest.approx(1.5)
    assert mbur.order_statistic_cdf(1.0, spec, 0.5) == pytest.approx(0.25)
    with pytest.raises(DomainError):
        mbur.OrderStatSpec(3, 4)


@pytest.mark.parametrize("n, j", [(1, 1), (5, 1), (5, 3), (7, 7)])
def test_order_statistic_pdf_integrates(n, j):
    spec = mbur.OrderStatSpec(n, j)
    a = 1.3
    total = quad01(lambda y: float(mbur.order_statistic_pdf(a, spec, y)))
    assert total == pytest.approx(1.0, abs=1e-8)
    part = integrate.quad(lambda y: float(mbur.order_statistic_pdf(a, spec, y)), 0, 0.4, epsabs=1e-13)[0]
    assert mbur.order_statistic_cdf(a, spec, 0.4) == pytest.approx(part, abs=1e-9)


# ---------------------------------------------------------------- mode etc

def test_mode():
    assert mbur.mode(0.5) == pytest.approx(0.89315398, abs=1e-8)
    assert mbur.mode(math.sqrt(2)) is None
    assert mbur.mode(2.0) is None
    for a in (0.5, 1.0, 1.3):
        m = mbur.mode(a)
        h = 1e-5
        assert mbur.pdf(a, m) >= mbur.pdf(a, m - h) and mbur.pdf(a, m) >= mbur.pdf(a, m + h)


# -------------------------------------------------------------- derivatives

def test_cdf_sensitivity_examples():
    s = mbur.cdf_sensitivities(1.0, 0.5, 0.5)
    assert s.dF_dalpha == pytest.approx(1.03972077, abs=1e-8)
    assert s.dQ_dalpha == pytest.approx(-math.log(2), abs=1e-8)


@pytest.mark.parametrize("a", [0.4, 1.0, 2.2])
@pytest.mark.parametrize("y", [0.05, 0.5, 0.95])
def test_cdf_sensitivities_vs_fd(a, y):
    h = 1e-5
    s = mbur.cdf_sensitivities(a, y, 0.3)
    F = lambda b: float(mbur.cdf(b, y))
    fd1 = (F(a + h) - F(a - h)) / (2 * h)
    fd2 = (F(a + h) - 2 * F(a) + F(a - h)) / h**2
    Q = lambda b: float(mbur.quantile(b, 0.3))
    fdq = (Q(a + h) - Q(a - h)) / (2 * h)
    assert s.dF_dalpha == pytest.approx(fd1, abs=1e-6)
    assert s.d2F_dalpha2 == pytest.approx(fd2, abs=1e-4, rel=1e-4)
    assert s.dQ_dalpha == pytest.approx(fdq, abs=1e-6)


def test_loglik_derivative_examples():
    ll, d1, d2 = mbur.loglik_bundle(1.0, [0.5])
    assert ll == pytest.approx(math.log(1.5))
    assert d1 == pytest.approx(-0.6137056388, abs=1e-9)
    assert d2 == pytest.approx(-6.0025, abs=1e-4)


@given(st.floats(0.3, 3.0), st.lists(st.floats(0.01, 0.99), min_size=1, max_size=20))
@settings(max_examples=50)
def test_loglik_derivatives_vs_fd(a, data):
    h = 1e-5
    ll, d1, d2 = mbur.loglik_bundle(a, data)
    lp, ln = mbur.loglik(a + h, data), mbur.loglik(a - h, data)
    assert d1 == pytest.approx((lp - ln) / (2 * h), rel=1e-6, abs=1e-6)
    g = lambda b: mbur.loglik_bundle(b, data).dl_dalpha
    assert d2 == pytest.approx((g(a + h) - g(a - h)) / (2 * h), rel=1e-6, abs=1e-5)


def test_lr_order():
    a1, a2 = 1.0, 2.0
    for y in (0.2, 0.6):
        h = 1e-6
        lr = lambda x: math.log(ref_pdf(a1, x) / ref_pdf(a2, x))
        assert mbur.lr_order_derivative(a1, a2, y) == pytest.approx((lr(y + h) - lr(y - h)) / (2 * h), rel=1e-6)
    assert mbur.lr_order_limit_at_one(a1, a2) == pytest.approx(1.875)
    assert mbur.lr_order_derivative(a1, a2, 1 - 1e-9) == pytest.approx(1.875, abs=1e-6)
    assert mbur.lr_order_limit_printed(a1, a2) == pytest.approx(2.25)


# ------------------------------------------------------------- construction

def test_construction_identity():
    for a in (0.5, 1.0, 2.5):
        w = np.linspace(0.01, 4 * a, 50)
        assert mbur.construction_identity_error(a, w) < 1e-12


@pytest.mark.parametrize("a", [0.5, 1.0, 2.5])
def test_construction_check(a):
    assert mbur.construction_check(a, 100_000, np.random.default_rng(7)) < 0.01


def test_sampler_matches_cdf(rng):
    from scipy import stats
    for a in (0.5, 2.5):
        y = mbur.sample(a, 20_000, rng)
        assert np.all((y > 0) & (y < 1))
        assert stats.kstest(y, lambda x: mbur.cdf(a, x)).pvalue > 1e-3
