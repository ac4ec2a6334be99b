"""Derivative-free simplex minimiser and a finite-difference Hessian."""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np


class SimplexResult(NamedTuple):
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
    message: str = ""


def nelder_mead(func: Callable[[np.ndarray], float], x0, step: float = 0.1,
                xtol: float = 1e-9, max_iter: int = 5000, restarts: int = 1) -> SimplexResult:
    """Minimise ``func`` with the Nelder-Mead simplex.

    Coefficients are reflection 1, expansion 2, contraction 0.5 and shrink
    0.5. The run stops once the simplex diameter (largest vertex distance to
    the best vertex) falls below ``xtol``; it is then restarted ``restarts``
    times from the best vertex with a fresh simplex.
    """
    x = np.asarray(x0, dtype=float)
    total = 0
    res = None
    for _ in range(restarts + 1):
        res = _nm_run(func, x, step, xtol, max_iter - total)
        total += res.iterations
        x = res.x
        if not res.converged:
            break
    return SimplexResult(res.x, res.fun, total, res.converged, res.message)


def _nm_run(func, x0, step, xtol, max_iter):
    dim = x0.size
    simplex = np.vstack([x0] + [x0 + step * e for e in np.eye(dim)])
    fvals = np.array([func(v) for v in simplex])
    for it in range(1, max_iter + 1):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        if np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1)) < xtol:
            return SimplexResult(simplex[0].copy(), float(fvals[0]), it, True)
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + (centroid - worst)
        fr = func(xr)
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = func(xe)
            simplex[-1], fvals[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        # contraction, outside if the reflection improved on the worst
        if fr < fvals[-1]:
            xc = centroid + 0.5 * (xr - centroid)
            fc = func(xc)
            accept = fc <= fr
        else:
            xc = centroid + 0.5 * (worst - centroid)
            fc = func(xc)
            accept = fc < fvals[-1]
        if accept:
            simplex[-1], fvals[-1] = xc, fc
            continue
        simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
        fvals[1:] = [func(v) for v in simplex[1:]]
    i = int(np.argmin(fvals))
    return SimplexResult(simplex[i].copy(), float(fvals[i]), max_iter, False,
                         f"simplex did not shrink below {xtol:g} in {max_iter} iterations")


def fd_hessian(func: Callable[[np.ndarray], float], x, rel_step: float = 1e-4) -> np.ndarray:
    """Central finite-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=float)
    k = x.size
    h = rel_step * np.maximum(np.abs(x), 1.0)
    H = np.empty((k, k))
    f0 = func(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (func(x + ei) - 2.0 * f0 + func(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (func(x + ei + ej) - func(x + ei - ej)
                                 - func(x - ei + ej) + func(x - ei - ej)) / (4.0 * h[i] * h[j])
    return H
