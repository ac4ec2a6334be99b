"""Point estimation of the MBUR shape parameter.

Eight estimators are provided: moments (closed form) and seven that optimise
a smooth scalar objective in alpha -- likelihood, product of spacings,
Anderson-Darling, percentile, Cramer-von Mises, least squares and weighted
least squares. Every objective comes with exact first and second
derivatives, and they all share one safeguarded Newton solver.

Standard errors follow the convention of the published fit tables: the
reported variance is the inverse observed information ``-1/l''(alpha)``
and the SE is ``sqrt(variance / n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, NamedTuple

import numpy as np

from . import mbur
from .errors import ConvergenceError, DegenerateSampleError, UnitfitError
from .sample import Sample

METHODS = ("mom", "mle", "mps", "ad", "percentile", "cvm", "ls", "wls")


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------

def z_quantile(level: float) -> float:
    """Two-sided standard-normal critical value for a ``level`` interval."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"confidence level must be in (0, 1), got {level!r}")
    return NormalDist().inv_cdf(0.5 + 0.5 * level)


@dataclass(frozen=True)
class FitResult:
    """Outcome of fitting one distribution to one sample.

    ``paper_variance`` is the inverse of the negative log-likelihood Hessian
    at the estimate (a k x k matrix); ``estimator_variance`` divides it by n
    and ``se`` is the square root of the diagonal of the latter.
    """

    dist: str
    method: str
    names: tuple
    values: tuple
    paper_variance: np.ndarray
    n: int
    loglik: float
    converged: bool = True
    iterations: int = 0
    level: float = 0.95
    objective: float = math.nan
    message: str = ""

    @property
    def k(self) -> int:
        return len(self.values)

    @property
    def params(self) -> dict:
        return dict(zip(self.names, self.values))

    @property
    def estimate(self):
        return self.values[0] if self.k == 1 else self.values

    @property
    def estimator_variance(self) -> np.ndarray:
        return np.asarray(self.paper_variance, dtype=float) / self.n

    def _per_param(self, arr):
        arr = tuple(float(v) for v in arr)
        return arr[0] if self.k == 1 else arr

    @property
    def se(self):
        d = np.diag(self.estimator_variance)
        with np.errstate(invalid="ignore"):
            return self._per_param(np.where(d >= 0, np.sqrt(np.abs(d)), np.nan))

    @property
    def ci_low(self):
        return self._per_param(np.asarray(self.values) - z_quantile(self.level) * np.atleast_1d(self.se))

    @property
    def ci_high(self):
        return self._per_param(np.asarray(self.values) + z_quantile(self.level) * np.atleast_1d(self.se))

    def to_dict(self) -> dict:
        pv = np.asarray(self.paper_variance, dtype=float)
        return {
            "dist": self.dist,
            "method": self.method,
            "n": self.n,
            "params": {k: float(v) for k, v in self.params.items()},
            "paper_variance": pv.tolist(),
            "se": dict(zip(self.names, np.atleast_1d(self.se).tolist())),
            "ci_level": self.level,
            "ci": {nm: [lo, hi] for nm, lo, hi in zip(
                self.names, np.atleast_1d(self.ci_low).tolist(), np.atleast_1d(self.ci_high).tolist())},
            "loglik": float(self.loglik),
            "objective": None if math.isnan(self.objective) else float(self.objective),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "message": self.message,
        }


def confidence_interval(fit: FitResult, level: float = 0.95):
    """Wald interval ``estimate +/- z * se`` for a one-parameter fit."""
    if not fit.converged:
        raise ConvergenceError(f"{fit.method} fit did not converge: {fit.message}",
                               best=fit.estimate, iterations=fit.iterations)
    se = fit.se
    if fit.k != 1:
        raise UnitfitError("confidence_interval expects a one-parameter fit")
    if not math.isfinite(se):
        raise UnitfitError("standard error is not finite (log-likelihood not concave at the estimate)")
    z = z_quantile(level)
    return fit.estimate - z * se, fit.estimate + z * se


# --------------------------------------------------------------------------
# scalar optimiser
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimizerConfig:
    bracket_low: float = 1e-3
    bracket_high: float = 50.0
    tol_alpha: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not 0 < self.bracket_low < self.bracket_high:
            raise ValueError("need 0 < bracket_low < bracket_high")


class SolveResult(NamedTuple):
    x: float
    iterations: int
    converged: bool
    message: str = ""


Objective = Callable[[float], "tuple[float, float, float]"]


def solve_scalar(objective: Objective, config: OptimizerConfig = OptimizerConfig(),
                 x0: float | None = None) -> SolveResult:
    """Minimise a smooth scalar function given value, first and second derivative.

    Starting from ``x0`` the routine walks outward geometrically until the
    derivative changes sign, then runs Newton on the derivative, falling back
    to bisection whenever the Newton step leaves the bracket or the curvature
    is not positive. If the derivative never changes sign inside the allowed
    bracket the minimum sits on the edge and the result is flagged as not
    converged, carrying the edge as best iterate.
    """
    lo_lim, hi_lim = config.bracket_low, config.bracket_high
    if x0 is None or not math.isfinite(x0):
        x0 = math.sqrt(lo_lim * hi_lim)
    x = min(max(float(x0), lo_lim), hi_lim)
    evals = 0

    def grad(z):
        nonlocal evals
        evals += 1
        with np.errstate(all="ignore"):
            return objective(z)

    _, g, h = grad(x)
    # pull back inside the region where the objective is finite
    pulls = 0
    while not math.isfinite(g) and pulls < 60:
        x = math.sqrt(x * (1.0 if x0 is None else max(min(x0, hi_lim), lo_lim)))
        if pulls % 2:
            x = math.sqrt(x * math.sqrt(lo_lim * hi_lim))
        _, g, h = grad(x)
        pulls += 1
    if not math.isfinite(g):
        return SolveResult(x, evals, False, "objective not finite near the starting point")
    if g == 0.0:
        return SolveResult(x, evals, True, "zero gradient at start")

    # bracket the sign change of the derivative
    a, b = x, x
    step = 1.5
    if g < 0:
        while True:
            nxt = min(b * step, hi_lim)
            _, gn, _ = grad(nxt)
            if not math.isfinite(gn):
                nxt = math.sqrt(b * nxt)
                _, gn, _ = grad(nxt)
                if not math.isfinite(gn):
                    return SolveResult(b, evals, False, "objective not finite while bracketing")
            if gn > 0:
                a, b = b, nxt
                break
            b = nxt
            if nxt >= hi_lim:
                return SolveResult(hi_lim, evals, False, "optimum at upper bracket edge")
            step *= 1.5
    else:
        while True:
            nxt = max(a / step, lo_lim)
            _, gn, _ = grad(nxt)
            if not math.isfinite(gn):
                nxt = math.sqrt(a * nxt)
                _, gn, _ = grad(nxt)
                if not math.isfinite(gn):
                    return SolveResult(a, evals, False, "objective not finite while bracketing")
            if gn < 0:
                a, b = nxt, a
                break
            a = nxt
            if nxt <= lo_lim:
                return SolveResult(lo_lim, evals, False, "optimum at lower bracket edge")
            step *= 1.5

    # safeguarded Newton inside [a, b], g(a) < 0 < g(b)
    x = x if a <= x <= b else 0.5 * (a + b)
    _, g, h = grad(x)
    for it in range(config.max_iter):
        if not math.isfinite(g):
            return SolveResult(x, evals, False, "objective not finite inside bracket")
        if g == 0.0:
            return SolveResult(x, evals, True)
        if g < 0:
            a = x
        else:
            b = x
        newton_ok = math.isfinite(h) and h > 0
        xn = x - g / h if newton_ok else math.nan
        if not (newton_ok and a < xn < b):
            xn = 0.5 * (a + b)
        dx = abs(xn - x)
        x = xn
        if dx < config.tol_alpha or b - a < config.tol_alpha:
            return SolveResult(x, evals, True)
        _, g, h = grad(x)
    return SolveResult(x, evals, False, f"no convergence in {config.max_iter} iterations")


# --------------------------------------------------------------------------
# per-observation cdf terms in c = 1/alpha^2
# --------------------------------------------------------------------------

class _CdfTerms(NamedTuple):
    F: np.ndarray
    S: np.ndarray
    Fc: np.ndarray       # dF/dc
    Fcc: np.ndarray      # d2F/dc2
    logF: np.ndarray
    logS: np.ndarray
    Fc_F: np.ndarray     # (dF/dc) / F
    Fcc_F: np.ndarray
    Fc_S: np.ndarray     # (dF/dc) / S
    Fcc_S: np.ndarray


def _cdf_terms(c: float, ly: np.ndarray) -> _CdfTerms:
    t = np.exp(c * ly)
    omt = -np.expm1(c * ly)
    t2 = t * t
    F = t2 * (3.0 - 2.0 * t)
    S = omt * omt * (1.0 + 2.0 * t)
    Fc = 6.0 * ly * t2 * omt
    Fcc = 6.0 * ly * ly * t2 * (2.0 - 3.0 * t)
    logF = 2.0 * c * ly + np.log(3.0 - 2.0 * t)
    logS = 2.0 * np.log(omt) + np.log1p(2.0 * t)
    Fc_F = 6.0 * ly * omt / (3.0 - 2.0 * t)
    Fcc_F = 6.0 * ly * ly * (2.0 - 3.0 * t) / (3.0 - 2.0 * t)
    den = omt * (1.0 + 2.0 * t)
    Fc_S = 6.0 * ly * t2 / den
    Fcc_S = 6.0 * ly * ly * t2 * (2.0 - 3.0 * t) / (omt * den)
    return _CdfTerms(F, S, Fc, Fcc, logF, logS, Fc_F, Fcc_F, Fc_S, Fcc_S)


def _chain(alpha):
    """c, dc/dalpha, d2c/dalpha2 for c = alpha**-2."""
    return alpha**-2, -2.0 * alpha**-3, 6.0 * alpha**-4


def _to_alpha(v, dc, dcc, alpha):
    """Convert (value, d/dc, d2/dc2) to alpha derivatives."""
    c, c1, c2 = _chain(alpha)
    return v, dc * c1, dcc * c1 * c1 + dc * c2


# --------------------------------------------------------------------------
# objectives (all minimised)
# --------------------------------------------------------------------------

def _values(data) -> np.ndarray:
    return Sample.from_values(data).values


def neg_loglik_objective(data) -> Objective:
    y = _values(data)

    def obj(alpha):
        ll, d1, d2 = mbur.loglik_bundle(alpha, y)
        return -ll, -d1, -d2

    return obj


def _spacing_logs(c, ly, terms: _CdfTerms, boundary=True):
    """log D_i and its c-derivatives for the spacings of sorted data.

    Spacings are taken from F where the lower end is below 1/2 and from S
    otherwise, so neither tail cancels. Returns (logD, dlogD/dc, d2logD/dc2,
    tie mask) for the n interior/lower spacings, plus the top spacing when
    ``boundary`` is set.
    """
    F, S, Fc, Fcc = terms.F, terms.S, terms.Fc, terms.Fcc
    n = F.size
    Fprev = np.concatenate(([0.0], F[:-1]))
    Sprev = np.concatenate(([1.0], S[:-1]))
    Fcprev = np.concatenate(([0.0], Fc[:-1]))
    Fccprev = np.concatenate(([0.0], Fcc[:-1]))
    D = np.where(Fprev < 0.5, F - Fprev, Sprev - S)
    Dc = Fc - Fcprev
    Dcc = Fcc - Fccprev
    # first spacing is F itself; use the exact log-ratios there
    D[0] = F[0]
    if boundary:
        D = np.append(D, S[-1])
        Dc = np.append(Dc, -Fc[-1])
        Dcc = np.append(Dcc, -Fcc[-1])
    ties = np.zeros(D.size, dtype=bool)
    ties[1:n] = ly[1:] == ly[:-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        logD = np.log(D)
        r1 = Dc / D
        r2 = Dcc / D - r1 * r1
    logD[0], r1[0], r2[0] = terms.logF[0], terms.Fc_F[0], terms.Fcc_F[0] - terms.Fc_F[0] ** 2
    if boundary:
        logD[-1] = terms.logS[-1]
        r1[-1] = -terms.Fc_S[-1]
        r2[-1] = -terms.Fcc_S[-1] - terms.Fc_S[-1] ** 2
    if np.any(ties):
        # zero spacing: substitute the log-density at the tied observation
        t = np.exp(c * ly[ties[:n]])
        omt = -np.expm1(c * ly[ties[:n]])
        lyt = ly[ties[:n]]
        logD[ties] = np.log(6.0 * c) + np.log(omt) + (2.0 * c - 1.0) * lyt
        q = t * lyt / omt
        r1[ties] = 1.0 / c - q + 2.0 * lyt
        r2[ties] = -1.0 / c**2 - t * lyt * lyt / (omt * omt)
    return logD, r1, r2


def mps_objective(data, spacings: str = "n+1") -> Objective:
    """Negative mean log spacing.

    ``spacings="n+1"`` uses all n+1 spacings including ``1 - F(y_n)``;
    ``"n"`` drops that top spacing. Both divide by n+1.
    """
    s = Sample.from_values(data)
    if s.n < 2:
        raise DegenerateSampleError("MPS needs at least 2 observations")
    if np.all(s.values == s.values[0]):
        raise DegenerateSampleError("all observations tied; spacings carry no information")
    if spacings not in ("n+1", "n"):
        raise ValueError("spacings must be 'n+1' or 'n'")
    ly = np.log(s.values)
    m = s.n + 1

    def obj(alpha):
        c = alpha**-2
        terms = _cdf_terms(c, ly)
        logD, r1, r2 = _spacing_logs(c, ly, terms, boundary=spacings == "n+1")
        v, d1, d2 = _to_alpha(-logD.sum() / m, -r1.sum() / m, -r2.sum() / m, alpha)
        return v, d1, d2

    return obj


def ad_objective(data) -> Objective:
    y = _values(data)
    n = y.size
    ly = np.log(y)
    w = (2.0 * np.arange(1, n + 1) - 1.0) / n
    wr = w[::-1]  # weight attached to log S(y_i) is that of position n+1-i

    def obj(alpha):
        c = alpha**-2
        T = _cdf_terms(c, ly)
        v = -n - np.sum(w * T.logF + wr * T.logS)
        dc = -np.sum(w * T.Fc_F - wr * T.Fc_S)
        dcc = -np.sum(w * (T.Fcc_F - T.Fc_F**2) - wr * (T.Fcc_S + T.Fc_S**2))
        return _to_alpha(v, dc, dcc, alpha)

    return obj


def _weighted_cdf_ls(y, targets, weights, const=0.0) -> Objective:
    ly = np.log(y)

    def obj(alpha):
        c, c1, c2 = _chain(alpha)
        T = _cdf_terms(c, ly)
        r = T.F - targets
        Fa = T.Fc * c1
        Faa = T.Fcc * c1 * c1 + T.Fc * c2
        v = const + np.sum(weights * r * r)
        d1 = 2.0 * np.sum(weights * r * Fa)
        d2 = 2.0 * np.sum(weights * (Fa * Fa + r * Faa))
        return v, d1, d2

    return obj


def cvm_objective(data) -> Objective:
    y = _values(data)
    n = y.size
    p = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    return _weighted_cdf_ls(y, p, np.ones(n), 1.0 / (12.0 * n))


def ls_objective(data) -> Objective:
    y = _values(data)
    n = y.size
    return _weighted_cdf_ls(y, np.arange(1, n + 1) / (n + 1.0), np.ones(n))


def wls_weights(n: int) -> np.ndarray:
    i = np.arange(1, n + 1, dtype=float)
    return (n + 1.0) ** 2 * (n + 2.0) / (i * (n + 1.0 - i))


def wls_objective(data, weights=None) -> Objective:
    y = _values(data)
    n = y.size
    w = wls_weights(n) if weights is None else np.asarray(weights, dtype=float)
    return _weighted_cdf_ls(y, np.arange(1, n + 1) / (n + 1.0), w)


def percentile_objective(data) -> Objective:
    y = _values(data)
    n = y.size
    lb = np.log(mbur._cubic_root(np.arange(1, n + 1) / (n + 1.0)))

    def obj(alpha):
        q = np.exp(alpha * alpha * lb)
        q1 = 2.0 * alpha * lb * q
        q2 = q * (2.0 * lb + 4.0 * alpha * alpha * lb * lb)
        r = y - q
        return float(np.sum(r * r)), float(-2.0 * np.sum(r * q1)), float(2.0 * np.sum(q1 * q1 - r * q2))

    return obj


_OBJECTIVES = {
    "mle": neg_loglik_objective,
    "mps": mps_objective,
    "ad": ad_objective,
    "percentile": percentile_objective,
    "cvm": cvm_objective,
    "ls": ls_objective,
    "wls": wls_objective,
}


def objective(method: str, data, **kwargs) -> Objective:
    """Return the minimised objective ``alpha -> (value, d1, d2)`` for ``method``."""
    try:
        return _OBJECTIVES[method](data, **kwargs)
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}") from None


# --------------------------------------------------------------------------
# estimators
# --------------------------------------------------------------------------

def mom_alpha(mean: float) -> float:
    """Invert ``E[Y] = 6 / ((2 + a^2)(3 + a^2))`` for alpha."""
    if not 0.0 < mean < 1.0:
        raise DegenerateSampleError(f"sample mean must be in (0, 1), got {mean!r}")
    return math.sqrt((-5.0 + math.sqrt(1.0 + 24.0 / mean)) / 2.0)


def estimate_alpha(method: str, data, config: OptimizerConfig = OptimizerConfig(),
                   **kwargs) -> SolveResult:
    """Bare point estimate (no variance bookkeeping); used by the simulation engine."""
    s = Sample.from_values(data)
    start = mom_alpha(s.mean())
    if method == "mom":
        if start < config.bracket_low:
            return SolveResult(start, 0, False, "sample mean near 1; moment estimate at the alpha -> 0 boundary")
        return SolveResult(start, 0, True)
    if method != "mle" and s.n < 2:
        raise DegenerateSampleError(f"{method} needs at least 2 observations")
    return solve_scalar(objective(method, s, **kwargs), config, x0=start)


def _finish(method, s: Sample, alpha, iterations, converged, message="", level=0.95,
            obj_value=math.nan) -> FitResult:
    ll, _, d2 = mbur.loglik_bundle(alpha, s.values)
    var = -1.0 / d2 if d2 < 0 else math.nan
    return FitResult("mbur", method, ("alpha",), (float(alpha),), np.array([[var]]), s.n,
                     ll, converged, iterations, level, obj_value, message)


def fit(method: str, data, config: OptimizerConfig = OptimizerConfig(), level: float = 0.95,
        **kwargs) -> FitResult:
    """Fit MBUR by ``method`` (one of :data:`METHODS`)."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    s = Sample.from_values(data)
    res = estimate_alpha(method, s, config, **kwargs)
    obj_value = math.nan
    if method != "mom":
        with np.errstate(all="ignore"):
            obj_value = float(objective(method, s, **kwargs)(res.x)[0])
        if method in ("mle", "mps"):
            obj_value = -obj_value
    return _finish(method, s, res.x, res.iterations, res.converged, res.message, level, obj_value)


def fit_mom(data, **kw) -> FitResult:
    return fit("mom", data, **kw)


def fit_mle(data, **kw) -> FitResult:
    return fit("mle", data, **kw)


def fit_mps(data, **kw) -> FitResult:
    return fit("mps", data, **kw)


def fit_ad(data, **kw) -> FitResult:
    return fit("ad", data, **kw)


def fit_percentile(data, **kw) -> FitResult:
    return fit("percentile", data, **kw)


def fit_cvm(data, **kw) -> FitResult:
    return fit("cvm", data, **kw)


def fit_ls(data, **kw) -> FitResult:
    return fit("ls", data, **kw)


def fit_wls(data, **kw) -> FitResult:
    return fit("wls", data, **kw)
