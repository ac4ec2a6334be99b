"""Goodness-of-fit statistics, Monte-Carlo reference distributions and
descriptive summaries.

A *model* argument is anything with a ``cdf`` method (the distribution
objects of :mod:`unitfit.competitors`) or a plain callable returning F(y).
When the model also has ``sf`` it is used for upper-tail logs in the
Anderson-Darling statistic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, optimize, special, stats

from . import estimation
from .errors import ConvergenceError, DegenerateSampleError, DomainError, UnitfitError
from .sample import Sample
from .seeding import map_ordered, substream_rng

CLIP = 1e-15
STATISTICS = ("ks", "ad", "cvm")
DEFAULT_LEVELS = (0.025, 0.95, 0.975)


class ClippingWarning(UserWarning):
    """Model CDF values hit 0 or 1 and were clipped inside a log."""


def _cdf(model) -> Callable:
    return model.cdf if hasattr(model, "cdf") else model


def _sf(model) -> Callable:
    if hasattr(model, "sf"):
        return model.sf
    f = _cdf(model)
    return lambda y: 1.0 - np.asarray(f(y))


# --------------------------------------------------------------------------
# statistics on rows of sorted probabilities
# --------------------------------------------------------------------------

def _ks_rows(F):
    n = F.shape[-1]
    i = np.arange(1, n + 1)
    return np.maximum(np.max(i / n - F, axis=-1), np.max(F - (i - 1) / n, axis=-1))


def _clip_logs(F, S):
    bad = (F < CLIP) | (S < CLIP)
    count = int(np.count_nonzero(bad))
    if count:
        warnings.warn(f"{count} model CDF value(s) clipped to [{CLIP:g}, 1 - {CLIP:g}] in the AD statistic",
                      ClippingWarning, stacklevel=3)
    return np.log(np.maximum(F, CLIP)), np.log(np.maximum(S, CLIP))


def _ad_rows(F, S):
    n = F.shape[-1]
    w = (2.0 * np.arange(1, n + 1) - 1.0) / n
    lF, lS = _clip_logs(F, S)
    return -n - np.sum(w * (lF + lS[..., ::-1]), axis=-1)


def _cvm_rows(F):
    n = F.shape[-1]
    p = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    return 1.0 / (12.0 * n) + np.sum((F - p) ** 2, axis=-1)


def _model_probs(data, model):
    y = Sample.from_values(data).values
    return np.asarray(_cdf(model)(y), dtype=float), np.asarray(_sf(model)(y), dtype=float)


def ks_statistic(data, model) -> float:
    """Kolmogorov-Smirnov distance between the empirical CDF and ``model``."""
    F, _ = _model_probs(data, model)
    return float(_ks_rows(F))


def ad_statistic(data, model) -> float:
    """Anderson-Darling statistic; CDF values are clipped at 1e-15 with a warning."""
    F, S = _model_probs(data, model)
    return float(_ad_rows(F, S))


def cvm_statistic(data, model) -> float:
    """Cramer-von Mises statistic ``1/(12n) + sum (F_i - (2i-1)/(2n))^2``."""
    F, _ = _model_probs(data, model)
    return float(_cvm_rows(F))


def ks_pvalue(d: float, n: int, exact: bool = False) -> float:
    """Kolmogorov-Smirnov p-value.

    By default the asymptotic Kolmogorov distribution evaluated at
    ``lambda = d (sqrt(n) + 0.12 + 0.11/sqrt(n))``. ``exact=True`` uses the
    exact finite-n distribution (``scipy.stats.kstwo``) instead.
    """
    if not 0.0 <= d <= 1.0:
        raise DomainError(f"KS distance must be in [0, 1], got {d!r}")
    if n < 1:
        raise DomainError("n must be >= 1")
    if exact:
        return float(stats.kstwo.sf(d, n))
    rn = math.sqrt(n)
    lam = d * (rn + 0.12 + 0.11 / rn)
    if lam <= 0.0:
        return 1.0
    if lam < 1.0:
        # theta-function form converges fast for small lambda
        q = math.exp(-math.pi**2 / (8.0 * lam * lam))
        s, k = 0.0, 1
        while True:
            term = q ** ((2 * k - 1) ** 2)
            s += term
            if term < 1e-16:
                break
            k += 1
        return min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / lam * s))
    total, k = 0.0, 1
    while True:
        term = math.exp(-2.0 * k * k * lam * lam)
        total += (-1) ** (k - 1) * term
        if term < 1e-12:
            break
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


# --------------------------------------------------------------------------
# information criteria
# --------------------------------------------------------------------------

class InfoCriteria(NamedTuple):
    aic: float
    caic: float
    bic: float
    hqic: float


def info_criteria(loglik: float, k: int, n: int) -> InfoCriteria:
    """AIC, corrected AIC, BIC and Hannan-Quinn (natural logs)."""
    if n <= k + 1:
        raise DomainError(f"CAIC needs n > k + 1 (n={n}, k={k})")
    m2 = -2.0 * loglik
    return InfoCriteria(m2 + 2.0 * k,
                        m2 + 2.0 * k * n / (n - k - 1.0),
                        m2 + k * math.log(n),
                        m2 + 2.0 * k * math.log(math.log(n)))


# --------------------------------------------------------------------------
# Monte-Carlo reference distributions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class McReference:
    """Simulated null distribution of one statistic."""

    statistic: str
    mode: str
    n: int
    values: np.ndarray          # sorted replicate statistics
    levels: tuple = DEFAULT_LEVELS
    dropped: int = 0

    @property
    def replicates(self) -> int:
        return int(self.values.size)

    @property
    def quantiles(self) -> dict:
        if self.values.size == 0:
            return {}
        return {float(p): float(np.quantile(self.values, p)) for p in self.levels}

    def pvalue(self, observed: float) -> float:
        """Share of replicate statistics at least as large as ``observed``."""
        if self.values.size == 0:
            return math.nan
        return float(np.mean(self.values >= observed))


def _refit(model, y):
    from .competitors import fit_mle_competitor, make_dist
    if model.name == "mbur":
        res = estimation.estimate_alpha("mle", y)
        if not res.converged:
            raise ConvergenceError(res.message, best=res.x)
        return make_dist("mbur", (res.x,))
    fit = fit_mle_competitor(model.name, y)
    if not fit.converged:
        raise ConvergenceError(fit.message, best=fit.values)
    return make_dist(model.name, fit.values)


def _mc_block(model, n, count, mode, seed, block):
    rng = substream_rng(seed, "gof-mc", model.name, mode, n, block)
    Y = np.sort(np.asarray(model.sample(n * count, rng)).reshape(count, n), axis=1)
    if mode == "fixed":
        F = np.asarray(model.cdf(Y), dtype=float)
        S = np.asarray(model.sf(Y), dtype=float)
        keep = np.ones(count, dtype=bool)
    else:
        F = np.empty_like(Y)
        S = np.empty_like(Y)
        keep = np.zeros(count, dtype=bool)
        for r in range(count):
            try:
                m = _refit(model, Y[r])
            except (UnitfitError, FloatingPointError):
                continue
            F[r], S[r], keep[r] = m.cdf(Y[r]), m.sf(Y[r]), True
        F, S = F[keep], S[keep]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClippingWarning)
        out = {"ks": _ks_rows(F), "ad": _ad_rows(F, S), "cvm": _cvm_rows(F)}
    return out, int(count - keep.sum())


def mc_reference_all(model, n: int, replicates: int, mode: str = "fixed", seed: int | np.random.Generator = 0,
                     levels=DEFAULT_LEVELS, block_size: int = 1000, workers: int | None = None) -> dict:
    """Null distributions of KS, AD and CVM from the same simulated samples.

    Replicates are generated in blocks of ``block_size``; block ``b`` draws
    from its own substream of ``seed`` so results do not depend on the
    number of workers.
    """
    if mode not in ("fixed", "refit"):
        raise ValueError("mode must be 'fixed' or 'refit'")
    if replicates < 0:
        raise ValueError("replicates must be >= 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(0, 2**63))
    nblocks = -(-replicates // block_size) if replicates else 0
    sizes = [min(block_size, replicates - b * block_size) for b in range(nblocks)]
    parts = map_ordered(lambda b: _mc_block(model, n, sizes[b], mode, seed, b), range(nblocks), workers)
    dropped = sum(p[1] for p in parts)
    out = {}
    for s in STATISTICS:
        vals = np.concatenate([p[0][s] for p in parts]) if parts else np.empty(0)
        vals = np.sort(vals)
        vals.setflags(write=False)
        out[s] = McReference(s, mode, n, vals, tuple(levels), dropped)
    return out


def mc_reference_distribution(model, n: int, statistic: str, replicates: int = 10_000,
                              mode: str = "fixed", seed: int | np.random.Generator = 0,
                              levels=DEFAULT_LEVELS, **kw) -> McReference:
    """Monte-Carlo null distribution of ``statistic`` (``ks``, ``ad`` or ``cvm``).

    ``mode="fixed"`` evaluates each simulated sample against ``model`` as
    given; ``mode="refit"`` re-estimates the parameters per replicate first
    (parametric bootstrap). Replicates whose refit fails are dropped and
    counted in ``dropped``.
    """
    if statistic not in STATISTICS:
        raise ValueError(f"statistic must be one of {STATISTICS}")
    return mc_reference_all(model, n, replicates, mode, seed, levels, **kw)[statistic]


# --------------------------------------------------------------------------
# combined report
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GofReport:
    ks_stat: float
    ks_pvalue: float
    ks_reject: bool
    ad_stat: float
    cvm_stat: float
    aic: float
    caic: float
    bic: float
    hqic: float
    loglik: float
    mc: dict = field(default_factory=dict)
    level: float = 0.05

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("ks_stat", "ks_pvalue", "ad_stat", "cvm_stat",
                                           "aic", "caic", "bic", "hqic", "loglik", "level")}
        d = {k: float(v) for k, v in d.items()}
        d["ks_reject"] = bool(self.ks_reject)
        d["mc"] = {s: {"mode": r.mode, "replicates": r.replicates, "dropped": r.dropped,
                       "quantiles": {f"{p:g}": q for p, q in r.quantiles.items()},
                       "pvalue": r.pvalue(getattr(self, f"{s}_stat"))}
                   for s, r in self.mc.items()}
        return d


def gof_report(data, model, level: float = 0.05, mc_replicates: int = 0, mode: str = "fixed",
               seed: int = 0, exact_ks: bool = False, workers: int | None = None) -> GofReport:
    """All statistics and criteria for ``model`` (a distribution object) on ``data``."""
    s = Sample.from_values(data)
    d = ks_statistic(s, model)
    p = ks_pvalue(d, s.n, exact=exact_ks)
    ll = model.loglik(s)
    ic = info_criteria(ll, model.k, s.n)
    mc = mc_reference_all(model, s.n, mc_replicates, mode, seed, workers=workers) if mc_replicates else {}
    return GofReport(d, p, p < level, ad_statistic(s, model), cvm_statistic(s, model),
                     *ic, ll, mc, level)


# --------------------------------------------------------------------------
# total time on test
# --------------------------------------------------------------------------

def ttt_empirical(data) -> tuple[np.ndarray, np.ndarray]:
    """Scaled empirical TTT: returns ``(i/n, TTT(i)/TTT(n))``."""
    x = np.sort(np.asarray(data, dtype=float).ravel())
    n = x.size
    if n < 2:
        raise DegenerateSampleError("TTT needs at least 2 observations")
    gaps = np.diff(np.concatenate(([0.0], x)))
    ttt = np.cumsum((n - np.arange(1, n + 1) + 1) * gaps)
    if ttt[-1] <= 0:
        raise DegenerateSampleError("total time on test is zero")
    return np.arange(1, n + 1) / n, ttt / ttt[-1]


def model_quantile(model, u):
    """Quantile via the model's own method or by root finding on its CDF."""
    if hasattr(model, "quantile"):
        return model.quantile(u)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty_like(u)
    lo, hi = 1e-300, 1.0 - 1e-16
    for i, ui in enumerate(u):
        if ui <= 0:
            out[i] = 0.0
        elif ui >= 1:
            out[i] = 1.0
        else:
            out[i] = optimize.brentq(lambda y: model.cdf(y) - ui, lo, hi, xtol=1e-15, rtol=1e-14)
    return out


def _sf_integral(model, upper: float) -> float:
    if upper <= 0:
        return 0.0
    val, err = integrate.quad(lambda x: model.sf(x), 0.0, upper, epsabs=1e-12, epsrel=1e-10, limit=500)
    if not math.isfinite(val):
        raise ConvergenceError("TTT quadrature failed")
    return val


def ttt_theoretical(model, u) -> tuple[np.ndarray, np.ndarray]:
    """Scaled TTT transform ``int_0^Q(u) S / int_0^Q(1-) S``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any((u < 0) | (u > 1)):
        raise DomainError("TTT grid must lie in [0, 1]")
    denom = _sf_integral(model, float(np.asarray(model_quantile(model, 1.0 - 1e-12)).ravel()[0]))
    q = np.atleast_1d(model_quantile(model, np.clip(u, 0.0, 1.0 - 1e-12)))
    vals = np.array([_sf_integral(model, float(qi)) for qi in q]) / denom
    vals[u >= 1.0] = 1.0
    return u, vals


# --------------------------------------------------------------------------
# descriptive statistics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DescriptiveStats:
    n: int
    min: float
    mean: float
    std: float
    skewness: float
    kurtosis: float
    p25: float
    p50: float
    p75: float
    max: float

    def to_dict(self) -> dict:
        return {k: (int(v) if k == "n" else float(v)) for k, v in self.__dict__.items()}


def percentile(x, p):
    """Percentiles (``p`` in [0, 100]) with order statistics at ``(k - 0.5)/n``."""
    x = np.sort(np.asarray(x, dtype=float).ravel())
    n = x.size
    pos = np.asarray(p, dtype=float) / 100.0 * n
    return np.interp(pos, np.arange(1, n + 1) - 0.5, x)


def sample_skew_kurt(x, bias_corrected: bool = False) -> tuple[float, float]:
    """Moment skewness and (non-excess) kurtosis.

    With ``bias_corrected=False`` these are ``m3/m2^1.5`` and ``m4/m2^2``
    from biased central moments. ``bias_corrected=True`` applies the usual
    small-sample corrections ``g1 sqrt(n(n-1))/(n-2)`` and
    ``(n-1)/((n-2)(n-3)) ((n+1) g2 + 6) + 3`` with ``g2`` the biased excess
    kurtosis.
    """
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 <= 0:
        raise DegenerateSampleError("all values are equal; skewness and kurtosis are undefined")
    g1 = np.mean(d**3) / m2**1.5
    b2 = np.mean(d**4) / m2**2
    if not bias_corrected:
        return float(g1), float(b2)
    if n < 4:
        raise DegenerateSampleError("bias-corrected kurtosis needs n >= 4")
    skew = g1 * math.sqrt(n * (n - 1.0)) / (n - 2.0)
    kurt = (n - 1.0) / ((n - 2.0) * (n - 3.0)) * ((n + 1.0) * (b2 - 3.0) + 6.0) + 3.0
    return float(skew), float(kurt)


def descriptive_stats(data, bias_corrected: bool = True) -> DescriptiveStats:
    """Summary table: extremes, mean, sd (n-1), skewness, kurtosis, quartiles.

    The published dataset tables use the small-sample corrected skewness and
    kurtosis, hence ``bias_corrected=True`` by default; pass ``False`` for
    plain moment ratios.
    """
    x = np.sort(np.asarray(getattr(data, "values", data), dtype=float).ravel())
    if x.size < 2:
        raise DegenerateSampleError("need at least 2 observations")
    skew, kurt = sample_skew_kurt(x, bias_corrected)
    p25, p50, p75 = percentile(x, [25, 50, 75])
    return DescriptiveStats(int(x.size), float(x[0]), float(x.mean()), float(x.std(ddof=1)),
                            skew, kurt, float(p25), float(p50), float(p75), float(x[-1]))


# --------------------------------------------------------------------------
# Lilliefors normality test
# --------------------------------------------------------------------------

class LillieforsResult(NamedTuple):
    stat: float
    reject: bool
    pvalue: float
    critical_value: float


def _lilliefors_rows(X):
    X = np.sort(X, axis=-1)
    n = X.shape[-1]
    z = (X - X.mean(axis=-1, keepdims=True)) / X.std(axis=-1, ddof=1, keepdims=True)
    return _ks_rows(special.ndtr(z))


def lilliefors_statistic(x) -> float:
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 4:
        raise DegenerateSampleError("Lilliefors test needs n >= 4")
    if np.all(x == x[0]):
        raise DegenerateSampleError("all values are equal")
    return float(_lilliefors_rows(x))


def lilliefors_test(x, level: float = 0.05, mc_replicates: int = 1000,
                    seed: int | np.random.Generator = 0, null=None) -> LillieforsResult:
    """KS test of normality with estimated mean and sd, calibrated by simulation.

    ``null`` may hold a precomputed :func:`lilliefors_null` for the same
    sample size, in which case ``mc_replicates`` and ``seed`` are ignored.
    The p-value is reported clamped to [0.001, 0.5].
    """
    stat = lilliefors_statistic(x)
    if null is None:
        null = lilliefors_null(np.asarray(x).size, mc_replicates, seed)
    crit = float(np.quantile(null, 1.0 - level))
    p = float(np.mean(null >= stat))
    return LillieforsResult(stat, bool(stat > crit), min(0.5, max(0.001, p)), crit)


def lilliefors_null(n: int, replicates: int, seed: int | np.random.Generator = 0) -> np.ndarray:
    """Simulated null distribution of the Lilliefors statistic for size ``n``."""
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else substream_rng(seed, "lilliefors", n)
    null = np.empty(replicates)
    block = max(1, min(replicates, 2_000_000 // max(n, 1)))
    for start in range(0, replicates, block):
        m = min(block, replicates - start)
        null[start:start + m] = _lilliefors_rows(rng.standard_normal((m, n)))
    return null
