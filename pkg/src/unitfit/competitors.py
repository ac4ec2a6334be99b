"""Benchmark unit-interval families behind a common distribution interface.

Each family exposes ``pdf``, ``logpdf``, ``cdf``, ``sf``, ``loglik``,
``quantile`` (where closed form or cheap), ``sample`` and ``k``. The MBUR
family is wrapped the same way so goodness-of-fit code can treat all five
alike.

The Unit-Lindley density used here is

    f(y) = theta^2 / (1 + theta) * (1 - y)^(-3) * exp(-theta y / (1 - y)),

the form that integrates to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import estimation, mbur
from .errors import ConvergenceError, DegenerateSampleError, DomainError
from .estimation import FitResult, OptimizerConfig
from .optimize import fd_hessian, nelder_mead
from .sample import Sample
from .special import log_beta, regularized_incomplete_beta

DIST_NAMES = ("mbur", "beta", "kumaraswamy", "topp-leone", "unit-lindley")


def _positive(name, v) -> float:
    v = float(v)
    if not (v > 0.0 and math.isfinite(v)):
        raise DomainError(f"{name} must be positive and finite, got {v!r}")
    return v


class UnitDistribution:
    """Base class; subclasses set ``name``, ``param_names`` and ``params``."""

    name = ""
    param_names: tuple = ()
    params: tuple = ()

    @property
    def k(self) -> int:
        return len(self.param_names)

    def pdf(self, y):
        return mbur._out(np.exp(self.logpdf(y)))

    def sf(self, y):
        return mbur._out(1.0 - np.asarray(self.cdf(y)))

    def loglik(self, data) -> float:
        return float(np.sum(self.logpdf(Sample.from_values(data).values)))

    def __repr__(self):
        args = ", ".join(f"{n}={v:.6g}" for n, v in zip(self.param_names, self.params))
        return f"{type(self).__name__}({args})"


class MBUR(UnitDistribution):
    name = "mbur"
    param_names = ("alpha",)

    def __init__(self, alpha):
        self.alpha = mbur.check_alpha(alpha)
        self.params = (self.alpha,)

    def pdf(self, y):
        return mbur.pdf(self.alpha, y)

    def logpdf(self, y):
        return mbur.logpdf(self.alpha, y)

    def cdf(self, y):
        return mbur.cdf(self.alpha, y)

    def sf(self, y):
        return mbur.sf(self.alpha, y)

    def quantile(self, u):
        return mbur.quantile(self.alpha, u)

    def sample(self, n, rng):
        return mbur.sample(self.alpha, n, rng)


class Beta(UnitDistribution):
    name = "beta"
    param_names = ("a", "b")

    def __init__(self, a, b):
        self.a, self.b = _positive("a", a), _positive("b", b)
        self.params = (self.a, self.b)

    def logpdf(self, y):
        y = mbur.check_unit(y)
        return mbur._out((self.a - 1.0) * np.log(y) + (self.b - 1.0) * np.log1p(-y)
                         - log_beta(self.a, self.b))

    def cdf(self, y):
        return regularized_incomplete_beta(self.a, self.b, mbur.check_unit(y))

    def sf(self, y):
        return regularized_incomplete_beta(self.b, self.a, 1.0 - mbur.check_unit(y))

    def sample(self, n, rng):
        out = rng.beta(self.a, self.b, size=int(n))
        return np.clip(out, mbur.Y_MIN, mbur.Y_MAX)


class Kumaraswamy(UnitDistribution):
    name = "kumaraswamy"
    param_names = ("a", "b")

    def __init__(self, a, b):
        self.a, self.b = _positive("a", a), _positive("b", b)
        self.params = (self.a, self.b)

    def logpdf(self, y):
        ly = np.log(mbur.check_unit(y))
        return mbur._out(math.log(self.a * self.b) + (self.a - 1.0) * ly
                         + (self.b - 1.0) * np.log(-np.expm1(self.a * ly)))

    def sf(self, y):
        ly = np.log(mbur.check_unit(y))
        return mbur._out(np.exp(self.b * np.log(-np.expm1(self.a * ly))))

    def cdf(self, y):
        ly = np.log(mbur.check_unit(y))
        return mbur._out(-np.expm1(self.b * np.log(-np.expm1(self.a * ly))))

    def quantile(self, u):
        u = mbur.check_probability(u)
        with np.errstate(divide="ignore"):
            return mbur._out(np.exp(np.log(-np.expm1(np.log1p(-u) / self.b)) / self.a))

    def sample(self, n, rng):
        return np.clip(self.quantile(rng.random(int(n))), mbur.Y_MIN, mbur.Y_MAX)


class ToppLeone(UnitDistribution):
    name = "topp-leone"
    param_names = ("theta",)

    def __init__(self, theta):
        self.theta = _positive("theta", theta)
        self.params = (self.theta,)

    def logpdf(self, y):
        y = mbur.check_unit(y)
        return mbur._out(math.log(2.0 * self.theta) + np.log1p(-y)
                         + (self.theta - 1.0) * np.log(y * (2.0 - y)))

    def cdf(self, y):
        y = mbur.check_unit(y)
        return mbur._out(np.exp(self.theta * np.log(y * (2.0 - y))))

    def quantile(self, u):
        u = mbur.check_probability(u)
        with np.errstate(divide="ignore"):
            v = np.exp(np.log(u) / self.theta)
        return mbur._out(1.0 - np.sqrt(1.0 - v))

    def sample(self, n, rng):
        return np.clip(self.quantile(rng.random(int(n))), mbur.Y_MIN, mbur.Y_MAX)


class UnitLindley(UnitDistribution):
    name = "unit-lindley"
    param_names = ("theta",)

    def __init__(self, theta):
        self.theta = _positive("theta", theta)
        self.params = (self.theta,)

    def logpdf(self, y):
        y = mbur.check_unit(y)
        th = self.theta
        return mbur._out(2.0 * math.log(th) - math.log1p(th) - 3.0 * np.log1p(-y)
                         - th * y / (1.0 - y))

    def sf(self, y):
        y = mbur.check_unit(y)
        th = self.theta
        x = y / (1.0 - y)
        return mbur._out((1.0 + th * x / (1.0 + th)) * np.exp(-th * x))

    def cdf(self, y):
        return mbur._out(1.0 - np.asarray(self.sf(y)))

    def sample(self, n, rng):
        # Y = X / (1 + X) with X Lindley: Exp(theta) w.p. theta/(1+theta), else Gamma(2, theta)
        n = int(n)
        th = self.theta
        shape = np.where(rng.random(n) < th / (1.0 + th), 1.0, 2.0)
        x = rng.gamma(shape, 1.0 / th)
        return np.clip(x / (1.0 + x), mbur.Y_MIN, mbur.Y_MAX)


_FAMILIES = {
    "mbur": MBUR,
    "beta": Beta,
    "kumaraswamy": Kumaraswamy,
    "topp-leone": ToppLeone,
    "unit-lindley": UnitLindley,
}


def make_dist(name: str, params) -> UnitDistribution:
    """Build a distribution from its family name and a parameter sequence."""
    try:
        cls = _FAMILIES[name]
    except KeyError:
        raise DomainError(f"unknown distribution {name!r}; choose from {', '.join(DIST_NAMES)}") from None
    params = tuple(np.atleast_1d(np.asarray(params, dtype=float)).tolist())
    if len(params) != len(cls.param_names):
        raise DomainError(f"{name} takes {len(cls.param_names)} parameter(s) "
                          f"({', '.join(cls.param_names)}), got {len(params)}")
    return cls(*params)


def beta_dist(a, b) -> Beta:
    return Beta(a, b)


def kumaraswamy_dist(a, b) -> Kumaraswamy:
    return Kumaraswamy(a, b)


def topp_leone_dist(theta) -> ToppLeone:
    return ToppLeone(theta)


def unit_lindley_dist(theta) -> UnitLindley:
    return UnitLindley(theta)


# --------------------------------------------------------------------------
# maximum likelihood
# --------------------------------------------------------------------------

def _beta_start(y):
    m, v = y.mean(), y.var(ddof=1)
    common = m * (1.0 - m) / v - 1.0 if v > 0 else 1.0
    if common <= 0:
        common = 1.0
    return np.array([m * common, (1.0 - m) * common])


def _result(name, s: Sample, params, H, converged, iterations, level, message=""):
    dist = make_dist(name, params)
    try:
        pv = np.linalg.inv(-np.atleast_2d(H))
    except np.linalg.LinAlgError:
        pv = np.full((dist.k, dist.k), np.nan)
    return FitResult(name, "mle", dist.param_names, tuple(float(p) for p in params), pv, s.n,
                     dist.loglik(s), converged, iterations, level, math.nan, message)


def _fit_two_param(cls, s: Sample, start, level):
    y = s.values

    def nll(logp):
        try:
            return -cls(*np.exp(logp)).loglik(y)
        except DomainError:
            return math.inf

    res = nelder_mead(nll, np.log(start))
    params = np.exp(res.x)
    if not np.all(np.isfinite(params)):
        raise ConvergenceError(f"{cls.name} fit diverged", best=tuple(params), iterations=res.iterations)
    H = fd_hessian(lambda p: cls(*p).loglik(y), params)
    return _result(cls.name, s, params, H, res.converged, res.iterations, level, res.message)


def unit_lindley_score_root(data) -> float:
    """Closed-form Unit-Lindley MLE: positive root of T th^2 + (T - n) th - 2n = 0."""
    y = Sample.from_values(data).values
    n = y.size
    T = float(np.sum(y / (1.0 - y)))
    return ((n - T) + math.sqrt((T - n) ** 2 + 8.0 * n * T)) / (2.0 * T)


def fit_mle_competitor(family: str, data, level: float = 0.95) -> FitResult:
    """Maximum-likelihood fit of one of :data:`DIST_NAMES`.

    Topp-Leone has a closed form; Unit-Lindley (and MBUR) use the safeguarded
    Newton solver; Beta and Kumaraswamy use Nelder-Mead on log-parameters.
    """
    s = Sample.from_values(data)
    if family == "mbur":
        return estimation.fit("mle", s, level=level)
    if family not in _FAMILIES:
        raise DomainError(f"unknown distribution {family!r}; choose from {', '.join(DIST_NAMES)}")
    if s.n < 3:
        raise DegenerateSampleError(f"{family} fit needs at least 3 observations")
    y = s.values
    n = s.n
    if family == "topp-leone":
        theta = -n / float(np.sum(np.log(y * (2.0 - y))))
        return _result(family, s, (theta,), [[-n / theta**2]], True, 0, level)
    if family == "unit-lindley":
        T = float(np.sum(y / (1.0 - y)))

        def obj(th):
            ll = 2 * n * math.log(th) - n * math.log1p(th) - th * T
            d1 = 2 * n / th - n / (1.0 + th) - T
            d2 = -2 * n / th**2 + n / (1.0 + th) ** 2
            return -ll, -d1, -d2

        start = 1.0 / float(np.mean(y / (1.0 - y)))
        res = estimation.solve_scalar(obj, OptimizerConfig(1e-8, 1e8), x0=start)
        if not res.converged:
            raise ConvergenceError(f"unit-lindley fit: {res.message}", best=res.x, iterations=res.iterations)
        th = res.x
        H = -2 * n / th**2 + n / (1.0 + th) ** 2
        return _result(family, s, (th,), [[H]], True, res.iterations, level)
    if family == "beta":
        return _fit_two_param(Beta, s, _beta_start(y), level)
    return _fit_two_param(Kumaraswamy, s, _beta_start(y), level)
