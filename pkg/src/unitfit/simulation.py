"""Replicated simulation studies of the MBUR estimators.

For each (method, n) cell, ``N`` samples are drawn at a known alpha and
fitted; the cell reports the mean estimate, its Monte-Carlo standard error
(sd of the estimates over sqrt(N)), AAB, MSE, RMSE and MRE, and optionally a
summary of the estimates' empirical distribution.

Every replicate draws from its own generator seeded by
``derive_substream_seed(master_seed, "sim", method, n, r)``, so cells can be
computed in any order and on any number of workers with identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import estimation, gof, mbur
from .errors import DegenerateSampleError, UnitfitError
from .seeding import derive_substream_seed, map_ordered, substream_rng

__all__ = [
    "SimStudyConfig", "CellResult", "SimStudyTable", "DistributionSummary",
    "run_study", "run_cell", "compute_metrics", "estimator_distribution_summary",
    "derive_substream_seed", "DEFAULT_SIZES", "MAX_FAILURE_RATE",
]

DEFAULT_SIZES = (20, 80, 160, 260, 500)
MAX_FAILURE_RATE = 0.05


@dataclass(frozen=True)
class SimStudyConfig:
    alpha_true: float
    sample_sizes: tuple = DEFAULT_SIZES
    replicates: int = 1000
    methods: tuple = estimation.METHODS
    master_seed: int = 0
    summarize: bool = True
    lilliefors_replicates: int = 1000
    mps_spacings: str = "n+1"

    def __post_init__(self):
        mbur.check_alpha(self.alpha_true)
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not self.sample_sizes or min(self.sample_sizes) < 2:
            raise ValueError("sample sizes must all be >= 2")
        bad = [m for m in self.methods if m not in estimation.METHODS]
        if bad or not self.methods:
            raise ValueError(f"unknown method(s) {bad}; choose from {', '.join(estimation.METHODS)}")
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, "methods", tuple(self.methods))


@dataclass(frozen=True)
class DistributionSummary:
    q025: float
    q975: float
    skewness: float
    kurtosis: float
    lilliefors_stat: float
    lilliefors_pvalue: float
    lilliefors_5pct: bool      # True means normality rejected
    lilliefors_1pct: bool

    def to_dict(self) -> dict:
        return {k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v))
                for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class Metrics:
    mean: float
    se: float
    aab: float
    mse: float
    rmse: float
    mre: float


def compute_metrics(estimates, alpha_true: float) -> Metrics:
    """Mean, MC standard error and error metrics of a vector of estimates."""
    e = np.asarray(estimates, dtype=float).ravel()
    if e.size == 0:
        raise DegenerateSampleError("no estimates")
    err = e - alpha_true
    aab = float(np.mean(np.abs(err)))
    mse = float(np.mean(err * err))
    se = float(e.std(ddof=1) / math.sqrt(e.size)) if e.size > 1 else math.nan
    return Metrics(float(e.mean()), se, aab, mse, math.sqrt(mse), aab / alpha_true)


def estimator_distribution_summary(estimates, alpha_true: float | None = None,
                                   lilliefors_replicates: int = 1000, seed: int = 0) -> DistributionSummary:
    """Quantiles, shape and normality of simulated estimates.

    Quantiles use the ``(k - 0.5)/N`` plotting positions; skewness and
    kurtosis are the plain moment ratios; Lilliefors decisions are given at
    the 5% and 1% levels (``True`` = normality rejected).
    """
    e = np.asarray(estimates, dtype=float).ravel()
    if e.size < 10:
        raise DegenerateSampleError("need at least 10 estimates")
    if np.all(e == e[0]):
        raise DegenerateSampleError("all estimates are equal")
    q025, q975 = gof.percentile(e, [2.5, 97.5])
    skew, kurt = gof.sample_skew_kurt(e, bias_corrected=False)
    null = gof.lilliefors_null(e.size, lilliefors_replicates, seed)
    at5 = gof.lilliefors_test(e, 0.05, null=null)
    at1 = gof.lilliefors_test(e, 0.01, null=null)
    return DistributionSummary(float(q025), float(q975), skew, kurt, at5.stat, at5.pvalue,
                               at5.reject, at1.reject)


@dataclass(frozen=True)
class CellResult:
    method: str
    n: int
    estimates: np.ndarray = field(repr=False)
    failures: int
    metrics: Metrics | None
    summary: DistributionSummary | None = None

    @property
    def replicates(self) -> int:
        return int(self.estimates.size) + self.failures

    @property
    def usable(self) -> bool:
        return self.metrics is not None and self.failures <= MAX_FAILURE_RATE * self.replicates

    def to_dict(self) -> dict:
        d = {"method": self.method, "n": self.n, "failures": self.failures, "usable": self.usable}
        if self.metrics is not None:
            d.update({k: float(v) for k, v in self.metrics.__dict__.items()})
        if self.summary is not None:
            d["distribution_summary"] = self.summary.to_dict()
        return d


def run_cell(alpha_true: float, method: str, n: int, replicates: int, master_seed: int,
             summarize: bool = True, lilliefors_replicates: int = 1000, mps_spacings: str = "n+1") -> CellResult:
    kwargs = {"spacings": mps_spacings} if method == "mps" else {}
    est = []
    failures = 0
    for r in range(replicates):
        rng = substream_rng(master_seed, "sim", method, n, r)
        y = mbur.sample(alpha_true, n, rng)
        try:
            res = estimation.estimate_alpha(method, y, **kwargs)
        except (UnitfitError, FloatingPointError, ZeroDivisionError):
            failures += 1
            continue
        if res.converged and math.isfinite(res.x):
            est.append(res.x)
        else:
            failures += 1
    est = np.asarray(est)
    est.setflags(write=False)
    metrics = compute_metrics(est, alpha_true) if est.size else None
    summary = None
    if summarize and est.size >= 10 and not np.all(est == est[0]):
        summary = estimator_distribution_summary(
            est, alpha_true, lilliefors_replicates,
            derive_substream_seed(master_seed, "summary", method, n))
    return CellResult(method, int(n), est, failures, metrics, summary)


@dataclass(frozen=True)
class SimStudyTable:
    config: SimStudyConfig
    cells: tuple

    def cell(self, method: str, n: int) -> CellResult:
        for c in self.cells:
            if c.method == method and c.n == n:
                return c
        raise KeyError((method, n))

    def rows(self) -> list:
        """Flat rows (one per method x n) for tabular output."""
        out = []
        for c in self.cells:
            row = {"alpha": self.config.alpha_true, "method": c.method, "n": c.n,
                   "replicates": c.replicates, "failures": c.failures, "usable": c.usable}
            for k in ("mean", "se", "aab", "mse", "rmse", "mre"):
                row[k] = getattr(c.metrics, k) if c.metrics is not None else math.nan
            if c.summary is not None:
                s = c.summary
                row.update(q025=s.q025, q975=s.q975, skewness=s.skewness, kurtosis=s.kurtosis,
                           lilliefors_pvalue=s.lilliefors_pvalue,
                           lilliefors_reject_5pct=s.lilliefors_5pct, lilliefors_reject_1pct=s.lilliefors_1pct)
            out.append(row)
        return out

    def to_dict(self) -> dict:
        cfg = self.config
        return {"alpha_true": cfg.alpha_true, "sample_sizes": list(cfg.sample_sizes),
                "replicates": cfg.replicates, "methods": list(cfg.methods),
                "master_seed": cfg.master_seed, "cells": [c.to_dict() for c in self.cells]}


def run_study(config: SimStudyConfig, workers: int | None = None) -> SimStudyTable:
    """Run every (method, n) cell of ``config``; cells are merged in grid order."""
    grid = [(m, n) for m in config.methods for n in config.sample_sizes]
    cells = map_ordered(
        lambda mn: run_cell(config.alpha_true, mn[0], mn[1], config.replicates, config.master_seed,
                            config.summarize, config.lilliefors_replicates, config.mps_spacings),
        grid, workers)
    return SimStudyTable(config, tuple(cells))
