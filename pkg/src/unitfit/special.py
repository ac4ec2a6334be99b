"""Special functions needed by the competitor families."""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError, DomainError

_TINY = 1e-300
_EPS = 1e-15
MAX_ITER = 300


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    x = float(x)
    if not (x > 0.0 and math.isfinite(x)):
        raise DomainError(f"log_gamma needs x > 0, got {x!r}")
    return math.lgamma(x)


def log_beta(a: float, b: float) -> float:
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def _betacf(a, b, x):
    """Continued fraction for I_x(a, b) by modified Lentz, vectorised over x."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(done, h, h * d * c)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < _EPS
        if done.all():
            return h
    raise ConvergenceError(f"incomplete beta continued fraction did not converge in {MAX_ITER} iterations",
                           iterations=MAX_ITER)


def regularized_incomplete_beta(a: float, b: float, y):
    """Regularized incomplete beta ``I_y(a, b)`` for ``y`` in [0, 1].

    Uses the continued fraction directly when ``y < (a+1)/(a+b+2)`` and the
    reflection ``1 - I_{1-y}(b, a)`` otherwise.
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"incomplete beta needs a, b > 0, got {a!r}, {b!r}")
    y = np.asarray(y, dtype=float)
    if np.any((y < 0) | (y > 1)) or np.any(np.isnan(y)):
        raise DomainError("incomplete beta argument must lie in [0, 1]")
    out = np.where(y >= 1.0, 1.0, 0.0)
    inner = (y > 0.0) & (y < 1.0)
    if np.any(inner):
        x = y[inner]
        lb = log_beta(a, b)
        front = np.exp(a * np.log(x) + b * np.log1p(-x) - lb)
        flip = x >= (a + 1.0) / (a + b + 2.0)
        val = np.empty_like(x)
        if np.any(~flip):
            xs = x[~flip]
            val[~flip] = front[~flip] * _betacf(a, b, xs) / a
        if np.any(flip):
            xs = 1.0 - x[flip]
            val[flip] = 1.0 - front[flip] * _betacf(b, a, xs) / b
        out[inner] = val
    return float(out) if out.ndim == 0 else out
