"""Median-Based Unit Rayleigh (MBUR) distribution.

If ``W`` is the median of three i.i.d. Rayleigh variables with
``F(w) = 1 - exp(-w**2 / alpha**2)``, then ``Y = exp(-W**2)`` lives on (0, 1)
with

    pdf(y) = (6 / alpha**2) * (1 - y**(1/alpha**2)) * y**(2/alpha**2 - 1)
    cdf(y) = 3 * y**(2/alpha**2) - 2 * y**(3/alpha**2)

Most closed forms are easiest to write in terms of ``c = 1 / alpha**2`` and
``t = y**c``; every power is evaluated as ``exp(k * c * log(y))`` and every
``1 - t`` as ``-expm1(c * log(y))`` so the tails keep full relative precision.

All functions broadcast over numpy arrays and return floats for scalar input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError

Y_MIN = 1e-300
Y_MAX = 1.0 - 1e-16

_SQRT3 = math.sqrt(3.0)


def check_alpha(alpha) -> float:
    """Validate the shape parameter and return it as a float."""
    try:
        a = float(alpha)
    except (TypeError, ValueError):
        raise DomainError(f"alpha must be a real number, got {alpha!r}") from None
    if not math.isfinite(a) or a <= 0:
        raise DomainError(f"alpha must be finite and > 0, got {alpha!r}")
    return a


def check_unit(y, name="y") -> np.ndarray:
    """Validate values strictly inside (0, 1); boundary values are rejected."""
    arr = np.asarray(y, dtype=float)
    bad = ~((arr >= Y_MIN) & (arr <= Y_MAX))
    if np.any(bad):
        first = arr[bad].flat[0]
        raise DomainError(f"{name} must lie strictly inside (0, 1), got {first!r}")
    return arr


def check_probability(u, name="u") -> np.ndarray:
    arr = np.asarray(u, dtype=float)
    bad = ~((arr >= 0.0) & (arr <= 1.0))
    if np.any(bad):
        raise DomainError(f"{name} must lie in [0, 1], got {arr[bad].flat[0]!r}")
    return arr


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _parts(alpha, y):
    """Shared pieces: (c, log y, t = y**c, 1 - t)."""
    a = check_alpha(alpha)
    y = check_unit(y)
    c = 1.0 / (a * a)
    ly = np.log(y)
    return c, ly, np.exp(c * ly), -np.expm1(c * ly)


# --------------------------------------------------------------------------
# basic functions
# --------------------------------------------------------------------------

def pdf(alpha, y):
    c, ly, t, omt = _parts(alpha, y)
    return _out(6.0 * c * omt * np.exp((2.0 * c - 1.0) * ly))


def logpdf(alpha, y):
    c, ly, t, omt = _parts(alpha, y)
    return _out(math.log(6.0 * c) + np.log(omt) + (2.0 * c - 1.0) * ly)


def cdf(alpha, y):
    c, ly, t, omt = _parts(alpha, y)
    return _out(t * t * (3.0 - 2.0 * t))


def sf(alpha, y):
    """Survival function, evaluated as ``(1 - t)**2 * (1 + 2 t)``.

    Algebraically identical to ``1 - cdf`` but without the cancellation
    near y = 1.
    """
    c, ly, t, omt = _parts(alpha, y)
    return _out(omt * omt * (1.0 + 2.0 * t))


class Reliability(NamedTuple):
    survival: float | np.ndarray
    hazard: float | np.ndarray
    reversed_hazard: float | np.ndarray


def reliability_functions(alpha, y) -> Reliability:
    """Survival, hazard ``f/S`` and reversed hazard ``f/F``.

    Raises
    ------
    ZeroDivisionError
        If the survival function or the cdf underflows to zero.
    """
    c, ly, t, omt = _parts(alpha, y)
    f = 6.0 * c * omt * np.exp((2.0 * c - 1.0) * ly)
    F = t * t * (3.0 - 2.0 * t)
    S = omt * omt * (1.0 + 2.0 * t)
    if np.any(S == 0.0):
        raise ZeroDivisionError("survival function underflows to 0")
    if np.any(F == 0.0):
        raise ZeroDivisionError("cdf underflows to 0")
    return Reliability(_out(S), _out(f / S), _out(f / F))


def hazard(alpha, y):
    return reliability_functions(alpha, y).hazard


def _cubic_root(u):
    """Root in [0, 1] of ``3 t**2 - 2 t**3 = u``.

    This is the trigonometric solution ``0.5 - 0.5(cos th - sqrt3 sin th)``
    with ``th = arccos(1 - 2u) / 3``, rewritten as
    ``2 sin(th/2) sin(pi/3 + th/2)`` and ``arccos(1 - 2u) = 2 arcsin(sqrt u)``
    so that small u does not cancel.
    """
    th = 2.0 * np.arcsin(np.sqrt(u)) / 3.0
    return 2.0 * np.sin(0.5 * th) * np.sin(math.pi / 3.0 + 0.5 * th)


def _cubic_root_printed(u):
    # literal closed form, kept for cross-checking the stable rewrite
    th = np.arccos(1.0 - 2.0 * u) / 3.0
    return np.maximum(-0.5 * (np.cos(th) - _SQRT3 * np.sin(th)) + 0.5, 0.0)


def quantile(alpha, u):
    a = check_alpha(alpha)
    u = check_probability(u)
    b = _cubic_root(u)
    with np.errstate(divide="ignore"):
        q = np.exp(a * a * np.log(b))
    # the trig form lands one ulp short of 1 at u = 1
    return _out(np.where(u == 1.0, 1.0, np.clip(q, 0.0, 1.0)))


def sample(alpha, n, rng) -> np.ndarray:
    """Draw ``n`` variates by inverse-transform sampling.

    ``rng`` is a ``numpy.random.Generator`` (or an int seed).
    """
    a = check_alpha(alpha)
    if int(n) < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    rng = np.random.default_rng(rng)
    u = rng.random(int(n))
    # u == 0 has probability 2**-53 per draw; redraw rather than emit y = 0
    while np.any(u == 0.0):
        u[u == 0.0] = rng.random(int(np.sum(u == 0.0)))
    y = np.exp(a * a * np.log(_cubic_root(u)))
    return np.clip(y, Y_MIN, Y_MAX)


# --------------------------------------------------------------------------
# moments and related functionals
# --------------------------------------------------------------------------

def raw_moment(alpha, r):
    a2 = check_alpha(alpha) ** 2
    if r < 0:
        raise DomainError(f"moment order must be >= 0, got {r!r}")
    return 6.0 / ((2.0 + r * a2) * (3.0 + r * a2))


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float
    skewness: float
    kurtosis: float
    cv: float


def moment_summary(alpha) -> MomentSummary:
    """Mean, variance, skewness, (non-excess) kurtosis and coefficient of variation."""
    m1, m2, m3, m4 = (raw_moment(alpha, r) for r in (1, 2, 3, 4))
    var = m2 - m1 * m1
    sd = math.sqrt(var)
    skew = (m3 - m1 * (3.0 * var + m1 * m1)) / sd**3
    kurt = (m4 - 4.0 * m1 * m3 + 3.0 * m1 * m1 * (2.0 * var + m1 * m1)) / var**2
    return MomentSummary(m1, var, skew, kurt, sd / m1)


def incomplete_moment(alpha, r, t):
    """``E[Y**r ; Y < t]``, the partial moment up to ``t``."""
    a = check_alpha(alpha)
    t = check_unit(t, "t")
    c = 1.0 / (a * a)
    lt = np.log(t)
    a2 = a * a
    return _out(6.0 * np.exp((2 * c + r) * lt) / (2.0 + r * a2)
                - 6.0 * np.exp((3 * c + r) * lt) / (3.0 + r * a2))


def stress_strength(alpha1, alpha2) -> float:
    """``P(Y < X)`` for strength ``X ~ MBUR(alpha1)`` and stress ``Y ~ MBUR(alpha2)``."""
    p = check_alpha(alpha1) ** 2
    q = check_alpha(alpha2) ** 2
    return q * (13.0 / (p + q) - 18.0 / (2 * p + 3 * q) - 12.0 / (3 * p + 2 * q))


class InequalityCurves(NamedTuple):
    lorenz: float | np.ndarray
    bonferroni: float | np.ndarray


def inequality_curves(alpha, t) -> InequalityCurves:
    """Lorenz and Bonferroni curves parameterised by the truncation point ``t``.

    The implied population fraction is ``p = cdf(alpha, t)``.
    """
    a = check_alpha(alpha)
    t = check_unit(t, "t")
    c = 1.0 / (a * a)
    a2 = a * a
    lt = np.log(t)
    tc = np.exp(c * lt)
    lorenz = np.exp((2 * c + 1) * lt) * ((3 + a2) - tc * (2 + a2))
    if np.any(tc == 0.0):
        raise ZeroDivisionError("cdf underflows to 0; Bonferroni curve undefined")
    bonf = t * ((3 + a2) - tc * (2 + a2)) / (3 - 2 * tc)
    return InequalityCurves(_out(lorenz), _out(bonf))


def gini(alpha) -> float:
    """Gini index in the closed form ``1 - a2 (5 + 3 a2) / ((1 + a2)(3 + 2 a2))``.

    Note this integrates the Lorenz curve against the truncation point rather
    than the population fraction, so it turns negative for ``alpha**2 > ~2.2``.
    """
    a2 = check_alpha(alpha) ** 2
    return 1.0 - a2 * (5 + 3 * a2) / ((1 + a2) * (3 + 2 * a2))


def _renyi_converges(a2, gamma):
    # integrand ~ y**(gamma*(2/a2 - 1)) at 0
    return gamma * (2.0 / a2 - 1.0) + 1.0 > 0.0


def renyi_integral_series(alpha, gamma: int) -> float:
    """``int f**gamma`` by the finite binomial sum (integer ``gamma`` only)."""
    a2 = check_alpha(alpha) ** 2
    g = int(gamma)
    if g != gamma or g < 2:
        raise DomainError("series form needs an integer order >= 2")
    if not _renyi_converges(a2, g):
        raise DomainError(f"integral of pdf**{g} diverges for alpha**2 = {a2:g}")
    total = sum((-1) ** m * math.comb(g, m) / (m + 2 * g - g * a2 + a2)
                for m in range(g + 1))
    return 6.0**g * a2 ** (1 - g) * total


def renyi_integral_quad(alpha, gamma: float) -> float:
    """``int f**gamma`` by adaptive quadrature, split at the mode."""
    a = check_alpha(alpha)
    a2 = a * a
    if gamma <= 0:
        raise DomainError("entropy order must be > 0")
    if not _renyi_converges(a2, gamma):
        raise DomainError(f"integral of pdf**{gamma:g} diverges for alpha**2 = {a2:g}")

    def integrand(y):
        if y <= 0.0 or y >= 1.0:
            return 0.0
        return math.exp(gamma * logpdf(a, y))

    return quad_unit(integrand, mode(a), epsabs=1e-12)


def renyi_entropy(alpha, gamma) -> float:
    """Rényi entropy ``log(int f**gamma) / (1 - gamma)``.

    Integer orders use the terminating binomial series; others use
    adaptive quadrature.

    Raises
    ------
    DomainError
        For ``gamma == 1``, ``gamma <= 0`` or when the integral diverges.
    ConvergenceError
        If the quadrature does not reach its tolerance.
    """
    if gamma <= 0 or gamma == 1:
        raise DomainError("entropy order must be > 0 and != 1")
    if float(gamma).is_integer():
        integral = renyi_integral_series(alpha, int(gamma))
    else:
        integral = renyi_integral_quad(alpha, gamma)
    return math.log(integral) / (1.0 - gamma)


def _survival_integral_to_one(c, y):
    """``int_y^1 S(x) dx`` from the antiderivative ``x - 3x^(2c+1)/(2c+1) + 2x^(3c+1)/(3c+1)``.

    For y close to 1 the antiderivative difference cancels catastrophically,
    so the integral is taken by 20-point Gauss-Legendre there instead (the
    integrand is analytic on the short interval).
    """
    y = np.asarray(y, dtype=float)
    ly = np.log(y)

    def G(ly_, yy):
        return (yy - 3.0 * np.exp((2 * c + 1) * ly_) / (2 * c + 1)
                + 2.0 * np.exp((3 * c + 1) * ly_) / (3 * c + 1))

    g1 = 1.0 - 3.0 / (2 * c + 1) + 2.0 / (3 * c + 1)
    exact = g1 - G(ly, y)

    near = -np.expm1(c * ly) < 0.05
    if np.any(near):
        x, w = np.polynomial.legendre.leggauss(20)
        yn = y[near][..., None]
        half = 0.5 * (1.0 - yn)
        pts = yn + half * (x + 1.0)
        omt = -np.expm1(c * np.log(pts))
        s = omt * omt * (1.0 + 2.0 * (1.0 - omt))
        exact = exact.copy() if exact.ndim else np.array(exact)
        exact[near] = np.sum(half * w * s, axis=-1)
    return exact


def mean_residual_life(alpha, y):
    """``E[Y - y | Y > y] = int_y^1 S / S(y)``."""
    c, ly, t, omt = _parts(alpha, y)
    S = omt * omt * (1.0 + 2.0 * t)
    if np.any(S == 0.0):
        raise ZeroDivisionError("survival function underflows to 0")
    return _out(_survival_integral_to_one(c, np.asarray(y, dtype=float)) / S)


def lr_order_derivative(alpha1, alpha2, y):
    """``d/dy log(f(y; alpha1) / f(y; alpha2))``."""
    a1, a2 = check_alpha(alpha1), check_alpha(alpha2)
    y = check_unit(y)
    ly = np.log(y)

    def dlogf(a):
        c = 1.0 / (a * a)
        t = np.exp(c * ly)
        return (-c * t / (-np.expm1(c * ly)) + 2.0 * c - 1.0) / y

    return _out(dlogf(a1) - dlogf(a2))


def lr_order_limit_at_one(alpha1, alpha2) -> float:
    """Exact limit of :func:`lr_order_derivative` as y -> 1: ``5/2 (1/a1^2 - 1/a2^2)``."""
    return 2.5 * (check_alpha(alpha1) ** -2 - check_alpha(alpha2) ** -2)


def lr_order_limit_printed(alpha1, alpha2) -> float:
    """The published limit ``3 (1/a1^2 - 1/a2^2)``.

    Kept for reference: it drops the ``-1/2 (c1 - c2)`` contributed by the
    ``log(1 - y**c)`` terms and so disagrees with the actual limit
    (:func:`lr_order_limit_at_one`).
    """
    return 3.0 * (check_alpha(alpha1) ** -2 - check_alpha(alpha2) ** -2)


def pwm(alpha, r, s) -> float:
    """Probability-weighted moment ``E[Y**r F(Y)**s]`` (finite sum over m <= s)."""
    a2 = check_alpha(alpha) ** 2
    if r < 0 or s < 0 or int(s) != s:
        raise DomainError("pwm needs r >= 0 and integer s >= 0")
    s = int(s)
    total = 0.0
    for m in range(s + 1):
        total += ((-1) ** m * math.comb(s, m) * (2.0 / 3.0) ** m
                  * (1.0 / (r * a2 + 2 * s + m + 2) - 1.0 / (r * a2 + 2 * s + m + 3)))
    return 3.0**s * 6.0 * total


# --------------------------------------------------------------------------
# order statistics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderStatSpec:
    n: int
    j: int

    def __post_init__(self):
        if self.n < 1 or not 1 <= self.j <= self.n:
            raise DomainError(f"need 1 <= j <= n, got n={self.n}, j={self.j}")


def order_statistic_pdf(alpha, spec: OrderStatSpec, y):
    n, j = spec.n, spec.j
    logc = math.lgamma(n + 1) - math.lgamma(j) - math.lgamma(n - j + 1)
    c, ly, t, omt = _parts(alpha, y)
    F = t * t * (3.0 - 2.0 * t)
    S = omt * omt * (1.0 + 2.0 * t)
    f = 6.0 * c * omt * np.exp((2.0 * c - 1.0) * ly)
    return _out(math.exp(logc) * f * F ** (j - 1) * S ** (n - j))


def order_statistic_cdf(alpha, spec: OrderStatSpec, y):
    n, j = spec.n, spec.j
    c, ly, t, omt = _parts(alpha, y)
    F = t * t * (3.0 - 2.0 * t)
    S = omt * omt * (1.0 + 2.0 * t)
    total = sum(math.comb(n, k) * F**k * S ** (n - k) for k in range(j, n + 1))
    return _out(total)


# --------------------------------------------------------------------------
# shape: mode and parameter sensitivities
# --------------------------------------------------------------------------

def mode(alpha) -> float | None:
    """Interior mode, or ``None`` when the density has none (``alpha**2 >= 2``)."""
    a = check_alpha(alpha)
    c = 1.0 / (a * a)
    if 2.0 * c - 1.0 <= 0.0:
        return None
    return ((2.0 * c - 1.0) / (3.0 * c - 1.0)) ** (a * a)


class CdfSensitivities(NamedTuple):
    dF_dalpha: float | np.ndarray
    d2F_dalpha2: float | np.ndarray
    dQ_dalpha: float | np.ndarray


def cdf_sensitivities(alpha, y, u=None) -> CdfSensitivities:
    """Derivatives of the cdf at ``y`` and of the quantile at ``u`` w.r.t. alpha.

    ``u`` defaults to ``cdf(alpha, y)`` so the three values describe the same
    point of the distribution.
    """
    a = check_alpha(alpha)
    c, ly, t, omt = _parts(a, y)
    t2 = t * t
    dF = 12.0 / a**3 * ly * t2 * (t - 1.0)
    d2F = 36.0 / a**4 * ly * t2 * omt + 24.0 / a**6 * ly * ly * t2 * (2.0 - 3.0 * t)
    if u is None:
        u = t2 * (3.0 - 2.0 * t)
    u = check_probability(u)
    b = _cubic_root(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        lb = np.log(b)
        q = np.exp(a * a * lb)
        dQ = np.where(b > 0, q * 2.0 * a * lb, 0.0)
    return CdfSensitivities(_out(dF), _out(d2F), _out(dQ))


class LoglikBundle(NamedTuple):
    loglik: float
    dl_dalpha: float
    d2l_dalpha2: float


def loglik_bundle(alpha, data) -> LoglikBundle:
    """Log-likelihood and its first two alpha-derivatives."""
    a = check_alpha(alpha)
    y = check_unit(np.asarray(getattr(data, "values", data), dtype=float))
    n = y.size
    c = 1.0 / (a * a)
    ly = np.log(y)
    t = np.exp(c * ly)
    omt = -np.expm1(c * ly)
    sly = ly.sum()
    r = t * ly / omt
    ll = n * math.log(6.0 * c) + np.log(omt).sum() + (2.0 * c - 1.0) * sly
    d1 = -2.0 * n / a + 2.0 / a**3 * r.sum() - 4.0 / a**3 * sly
    d2 = (2.0 * n / a**2 - 6.0 / a**4 * r.sum() + 12.0 / a**4 * sly
          - 4.0 / a**6 * (t * ly * ly / (omt * omt)).sum())
    return LoglikBundle(float(ll), float(d1), float(d2))


def loglik(alpha, data) -> float:
    return loglik_bundle(alpha, data).loglik


# --------------------------------------------------------------------------
# construction from the median of three Rayleigh variables
# --------------------------------------------------------------------------

def rayleigh_median_pdf(alpha, w):
    """Density of the median of three Rayleigh(alpha) variables."""
    a2 = check_alpha(alpha) ** 2
    w = np.asarray(w, dtype=float)
    e = np.exp(-w * w / a2)
    return _out(12.0 * w / a2 * (1.0 - e) * e * e)


def construction_identity_error(alpha, w) -> float:
    """Max abs difference between the median-Rayleigh density and the
    transformed MBUR density ``pdf(exp(-w**2)) * 2 w exp(-w**2)``."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    y = np.exp(-w * w)
    lhs = rayleigh_median_pdf(alpha, w)
    rhs = pdf(alpha, y) * 2.0 * w * y
    return float(np.max(np.abs(lhs - rhs)))


def construction_check(alpha, replicates, rng) -> float:
    """KS distance between transformed medians of Rayleigh triples and the MBUR cdf.

    Also asserts the pointwise density identity at a few ``w`` values.
    """
    a = check_alpha(alpha)
    if replicates < 10_000:
        raise DomainError("construction_check needs at least 10^4 replicates")
    rng = np.random.default_rng(rng)
    # Rayleigh with F(w) = 1 - exp(-w^2 / a^2): w = a sqrt(-log(1 - u))
    w = a * np.sqrt(-np.log1p(-rng.random((int(replicates), 3))))
    med = np.median(w, axis=1)
    y = np.sort(np.clip(np.exp(-med * med), Y_MIN, Y_MAX))
    err = construction_identity_error(a, [0.3, 1.0, 2.0])
    if err > 1e-10:
        raise AssertionError(f"density identity violated by {err:g}")
    F = cdf(a, y)
    n = y.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


# --------------------------------------------------------------------------
# quadrature helper (shared by tests and the non-integer entropy path)
# --------------------------------------------------------------------------

def quad_unit(func, split=None, epsabs=1e-10, epsrel=1e-10) -> float:
    """Adaptive quadrature of ``func`` over (0, 1), split at ``split`` if given."""
    pieces = [(0.0, 1.0)] if split is None or not 0 < split < 1 else [(0.0, split), (split, 1.0)]
    total = 0.0
    for lo, hi in pieces:
        val, err, *rest = integrate.quad(func, lo, hi, epsabs=epsabs, epsrel=epsrel,
                                         limit=500, full_output=1)
        if len(rest) > 1 and err > max(epsabs, epsrel * abs(val)) * 100:
            raise ConvergenceError(f"quadrature did not converge on [{lo}, {hi}]", best=val)
        total += val
    return total
