"""Brute-force reference computations, independent of the algebra in ``curves``.

These are deliberately slow and simple; they exist to cross-check the fast paths.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.ndimage import minimum_filter
from scipy.optimize import least_squares

from .curves import MomentCurve, gamma_derivative


def dense_distance(p, c: MomentCurve, n: int = 10**6) -> tuple[float, float]:
    """Scan t on a uniform grid of n points over [-1, 1]."""
    t = np.linspace(-1.0, 1.0, n)
    best_t, best = 0.0, np.inf
    for lo in range(0, n, 2**17):
        tt = t[lo:lo + 2**17]
        d2 = ((c.points(tt) - np.asarray(p, dtype=float)) ** 2).sum(axis=1)
        j = int(np.argmin(d2))
        if d2[j] < best:
            best, best_t = float(d2[j]), float(tt[j])
    return best_t, float(np.sqrt(best))


def _unit_tangents(t, d):
    v = gamma_derivative(t, d)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def tangency_grid_oracle(c1: MomentCurve, c2: MomentCurve, tol: float = 1e-6,
                         grid: int = 2000, n_refine: int = 8) -> Optional[tuple]:
    """Search [-1,1]^2 for (t, t') with c1(t) = c2(t') and parallel tangents.

    Objective: |c1(t) - c2(t')|^2 + |T(t) - T(t')|^2 with T the unit tangent of
    gamma (first component positive, so parallel means equal). The grid minima
    are polished with a bounded least-squares solve. Returns (t, t', residual)
    when the residual is <= tol.
    """
    d = c1.dim
    t = np.linspace(-1.0, 1.0, grid)
    A = c1.points(t)
    B = c2.points(t)
    TA = _unit_tangents(t, d)
    TB = _unit_tangents(t, d)
    G = np.zeros((grid, grid))
    for i in range(d):
        diff = A[:, i, None] - B[None, :, i]
        G += diff * diff
    G += 2.0 - 2.0 * (TA @ TB.T)

    # local minima of the grid objective, best first
    mask = minimum_filter(G, size=3, mode="nearest") == G
    flat = np.flatnonzero(mask)
    order = flat[np.argsort(G.ravel()[flat])][:n_refine]

    def resid(z):
        a, b = z
        return np.concatenate([c1.points(a) - c2.points(b),
                               _unit_tangents(a, d) - _unit_tangents(b, d)])

    best = None
    for k in order:
        z0 = np.array([t[k // grid], t[k % grid]])
        sol = least_squares(resid, z0, bounds=([-1, -1], [1, 1]), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        res = float(np.linalg.norm(resid(sol.x)))
        if best is None or res < best[2]:
            best = (float(sol.x[0]), float(sol.x[1]), res)
    if best is not None and best[2] <= tol:
        return best
    return None


def grid_intersections(c1: MomentCurve, c2: MomentCurve, step: float = 1e-4, tol: float = 1e-6) -> list:
    """Crossings located by scanning t and solving for t' through the first coordinate."""
    t = np.arange(-1.0, 1.0 + step / 2, step)
    p = c1.points(t)
    tp = (p[:, 0] - c2.center[0]) / c2.scale
    ok = np.abs(tp) <= 1.0
    gap = np.full(t.shape, np.inf)
    gap[ok] = np.linalg.norm(p[ok] - c2.points(tp[ok]), axis=1)
    hits = []
    for j in np.flatnonzero(gap < 50 * step):
        if (j == 0 or gap[j] <= gap[j - 1]) and (j == len(t) - 1 or gap[j] <= gap[j + 1]):
            hits.append(float(t[j]))
    return hits
