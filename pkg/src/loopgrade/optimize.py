"""Nelder-Mead simplex minimization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    nfev: int
    nit: int
    converged: bool


def nelder_mead(func, x0, step=0.1, xtol=1e-3, ftol=0.0, max_iter=2000, max_fev=None,
                alpha=1.0, gamma=2.0, rho=0.5, sigma=0.5) -> SimplexResult:
    """Minimize ``func`` from ``x0`` with the reflection/expansion/contraction/shrink simplex.

    Stops when every vertex lies within ``xtol`` (max-norm) of the best vertex
    and, if ``ftol`` > 0, the value spread is below ``ftol``.  ``step`` is the
    initial edge length along each axis (scalar or per-axis).
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    steps = np.broadcast_to(np.asarray(step, dtype=float), (n,))
    if max_fev is None:
        max_fev = 200 * (n + 1) * 10

    simplex = np.empty((n + 1, n))
    simplex[0] = x0
    for i in range(n):
        simplex[i + 1] = x0
        simplex[i + 1, i] += steps[i]
    fvals = np.array([func(p) for p in simplex], dtype=float)
    nfev = n + 1

    nit = 0
    converged = False
    while nit < max_iter and nfev < max_fev:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        spread = np.max(np.abs(simplex[1:] - simplex[0]))
        if spread < xtol and (ftol <= 0 or fvals[-1] - fvals[0] < ftol):
            converged = True
            break
        nit += 1

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = func(xr)
        nfev += 1
        if fvals[0] <= fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = func(xe)
            nfev += 1
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + rho * (xr - centroid)  # outside contraction
            fc = func(xc)
            nfev += 1
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + rho * (worst - centroid)  # inside contraction
            fc = func(xc)
            nfev += 1
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue
        simplex[1:] = simplex[0] + sigma * (simplex[1:] - simplex[0])
        fvals[1:] = [func(p) for p in simplex[1:]]
        nfev += n

    best = int(np.argmin(fvals))
    return SimplexResult(x=simplex[best].copy(), fun=float(fvals[best]), nfev=nfev,
                         nit=nit, converged=converged)
