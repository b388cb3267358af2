"""Averages over delta-tubes of moment curves and the s-parameter maximal function.

A curve H(x, r) has center x = (x_bar, x_tail) with x_bar in R^s (the sup
coordinates) and x_tail in R^(s'-1), s' = d + 1 - s. The maximal function is a
function of (x_tail, r): the sup over x_bar of the tube average. The sup is
taken over a finite search grid, so every reported value is a lower bound for
the continuum sup.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.special import roots_legendre
from scipy.stats import qmc

from .curves import MomentCurve, gamma_derivative, gamma_point, within_tube
from .errors import ConfigError, InvalidDelta, InvalidExponent, InvalidInput
from .fields import I1, I2, ScalarField, _Field
from .sampling import stream_rng

LOOKUP_BLOCK = 2**22


# -- tube quadrature -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TubeQuadrature:
    """Nodes y_i - x of H_delta(0, r) with positive weights, and the quadrature's
    own estimate of the tube volume."""

    offsets: np.ndarray
    weights: np.ndarray
    norm: float
    measure: float


@lru_cache(maxsize=256)
def tube_quadrature(d: int, r: float, delta: float, n: int = 4096, seed: int = 0) -> TubeQuadrature:
    """Scrambled Sobol nodes over the vertical parametrization y = r gamma(u) + (0, t).

    For |u| <= 1 + delta/r every tube point in the slice at u satisfies
    |P(0, t)| <= rho, where P projects away from the tangent at u and
    rho = delta (1 + delta/(2r) max|gamma''|) absorbs the curvature. That set is
    an ellipse, stretched by |gamma'(u)| along gamma~'(u); nodes are drawn in
    the bounding parallelepiped and kept when they lie in the tube. The map has
    Jacobian r |gamma'(u)| rho^(d-1) per unit of (u, cube) measure.
    """
    if not (0.0 < delta < 0.25):
        raise InvalidDelta(f"delta must lie in (0, 1/4), got {delta}")
    if n < 16:
        raise ConfigError("tube quadrature needs at least 16 nodes")
    U = 1.0 + delta / r
    curv = float(np.linalg.norm(gamma_derivative(U, d, 2)))
    rho = delta * (1.0 + delta / (2.0 * r) * curv)
    m = int(math.ceil(math.log2(n)))
    sob = qmc.Sobol(d, scramble=True, seed=stream_rng(seed, f"tube-quadrature-{d}"))
    q = sob.random_base2(m)
    u = -U + 2.0 * U * q[:, 0]
    g = gamma_derivative(u, d)
    speed = np.linalg.norm(g, axis=1)
    gt = g[:, 1:]
    gn = np.linalg.norm(gt, axis=1, keepdims=True)
    e = np.divide(gt, gn, out=np.zeros_like(gt), where=gn > 0)
    b = 2.0 * q[:, 1:] - 1.0
    t = rho * (b + ((speed - 1.0) * np.einsum("ij,ij->i", e, b))[:, None] * e)
    y = r * gamma_point(u, d)
    y[:, 1:] += t
    w = r * 2.0 * U * speed * (2.0 * rho) ** (d - 1)
    keep = within_tube(y, MomentCurve(np.zeros(d), r), delta)
    offsets = np.ascontiguousarray(y[keep])
    weights = np.ascontiguousarray(w[keep])
    norm = float(np.ones(weights.size) @ weights)
    return TubeQuadrature(offsets, weights, norm, float(weights.sum() / q.shape[0]))


def _check_field_resolution(f: _Field, delta: float):
    f.grid.check_resolution(delta)


def _averages(f: _Field, centers: np.ndarray, quad: TubeQuadrature) -> np.ndarray:
    """Tube averages of f for one quadrature at many curve centers."""
    k = quad.offsets.shape[0]
    out = np.empty(centers.shape[0])
    per = max(1, LOOKUP_BLOCK // max(k, 1))
    for i in range(0, centers.shape[0], per):
        c = centers[i:i + per]
        pts = (c[:, None, :] + quad.offsets[None]).reshape(-1, c.shape[1])
        vals = f.lookup(pts).reshape(c.shape[0], k)
        # a convex combination never exceeds its largest term; clamp the rounding
        avg = (vals @ quad.weights) / quad.norm
        out[i:i + per] = np.minimum(avg, vals.max(axis=1)) if k else 0.0
    return out


def tube_average(f: _Field, c: MomentCurve, delta: float, n: int = 4096, seed: int = 0) -> float:
    """(1/|H_delta|) times the integral of f over H_delta(x, r), normalized by the
    quadrature's own tube measure so that f = 1 gives exactly 1."""
    _check_field_resolution(f, delta)
    if f.dim != c.dim:
        raise InvalidInput("field and curve dimensions differ")
    quad = tube_quadrature(c.dim, c.scale, float(delta), int(n), int(seed))
    return float(_averages(f, c.x[None], quad)[0])


# -- the maximal function -------------------------------------------------------------


@dataclass(frozen=True)
class ParamSample:
    tail: tuple
    r: float

    def __post_init__(self):
        object.__setattr__(self, "tail", tuple(float(v) for v in self.tail))
        object.__setattr__(self, "r", float(self.r))
        if not self.r > 0:
            raise InvalidInput("r must be positive")


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    if hi == lo:
        return np.array([float(lo)])
    n = max(1, int(round((hi - lo) / step)))
    return lo + (hi - lo) * np.arange(n + 1) / n


@dataclass(frozen=True)
class MaximalConfig:
    """Search grid for x_bar and parameter grid for (x_tail, r).

    The search grid is centered in the search box with spacing search_step;
    the parameter grid has nodes at both ends of every range, spaced about
    param_step (default delta, the delta-net used by the example sets).
    """

    d: int = 3
    s: int = 2
    delta: float = 2.0**-6
    search_lo: Optional[tuple] = None
    search_hi: Optional[tuple] = None
    search_step: Optional[float] = None
    coarse_factor: int = 4
    refine_top: int = 5
    tail_range: tuple = I1
    r_range: tuple = I2
    param_step: Optional[float] = None
    tube_quadrature_n: int = 4096
    seed: int = 0

    def __post_init__(self):
        if not (1 <= self.s <= self.d):
            raise ConfigError(f"need 1 <= s <= d, got s={self.s}, d={self.d}")
        if not (0.0 < self.delta < 0.25):
            raise InvalidDelta(f"delta must lie in (0, 1/4), got {self.delta}")
        lo = (-0.5,) * self.s if self.search_lo is None else tuple(float(v) for v in self.search_lo)
        hi = (0.5,) * self.s if self.search_hi is None else tuple(float(v) for v in self.search_hi)
        if len(lo) != self.s or len(hi) != self.s:
            raise ConfigError("search box needs s lower and s upper bounds")
        if any(b < a for a, b in zip(lo, hi)):
            raise ConfigError("empty search box")
        object.__setattr__(self, "search_lo", lo)
        object.__setattr__(self, "search_hi", hi)
        step = self.delta if self.search_step is None else float(self.search_step)
        if not (0 < step <= self.delta * (1 + 1e-12)):
            raise ConfigError("search_step must lie in (0, delta]")
        object.__setattr__(self, "search_step", step)
        pstep = self.delta if self.param_step is None else float(self.param_step)
        if pstep <= 0:
            raise ConfigError("param_step must be positive")
        object.__setattr__(self, "param_step", pstep)
        if self.coarse_factor < 1 or self.refine_top < 1:
            raise ConfigError("coarse_factor and refine_top must be positive")
        if not (self.tail_range[0] <= self.tail_range[1] and 0 < self.r_range[0] <= self.r_range[1]):
            raise ConfigError("invalid parameter ranges")

    @property
    def s_prime(self) -> int:
        return self.d + 1 - self.s

    def search_offsets(self) -> list:
        """Integer offsets k with the grid point center + k * step inside the box, per axis."""
        out = []
        for a, b in zip(self.search_lo, self.search_hi):
            K = int(math.floor((b - a) / 2 / self.search_step + 1e-9))
            out.append(np.arange(-K, K + 1))
        return out

    def search_center(self) -> np.ndarray:
        return (np.asarray(self.search_lo) + np.asarray(self.search_hi)) / 2

    def param_axes(self) -> list:
        """Tail axes followed by the r axis."""
        tail = [_axis(self.tail_range[0], self.tail_range[1], self.param_step)] * (self.s_prime - 1)
        return tail + [_axis(self.r_range[0], self.r_range[1], self.param_step)]

    def param_samples(self) -> list:
        axes = self.param_axes()
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
        return [ParamSample(row[:-1], row[-1]) for row in mesh]


def _search(f: _Field, sample: ParamSample, cfg: MaximalConfig) -> tuple[float, np.ndarray]:
    """Coarse scan at coarse_factor * step, then the full step grid around the best cells."""
    if len(sample.tail) != cfg.s_prime - 1:
        raise InvalidInput(f"sample needs {cfg.s_prime - 1} tail coordinates")
    quad = tube_quadrature(cfg.d, sample.r, cfg.delta, cfg.tube_quadrature_n, cfg.seed)
    axes = cfg.search_offsets()
    center = cfg.search_center()
    tail = np.asarray(sample.tail)
    cf = cfg.coarse_factor

    def centers(K):
        xb = center + K * cfg.search_step
        return np.concatenate([xb, np.broadcast_to(tail, (K.shape[0], tail.size))], axis=1)

    coarse_axes = [a[a % cf == 0] for a in axes]
    Kc = np.stack(np.meshgrid(*coarse_axes, indexing="ij"), axis=-1).reshape(-1, cfg.s)
    vc = _averages(f, centers(Kc), quad)
    seen = {tuple(k) for k in Kc}
    best_v = vc
    best_K = Kc
    top = np.argsort(-vc, kind="stable")[: cfg.refine_top]
    lo = np.array([a[0] for a in axes])
    hi = np.array([a[-1] for a in axes])
    local = np.stack(np.meshgrid(*[np.arange(-cf, cf + 1)] * cfg.s, indexing="ij"), axis=-1).reshape(-1, cfg.s)
    fine = []
    for i in top:
        for k in np.clip(Kc[i] + local, lo, hi):
            t = tuple(k)
            if t not in seen:
                seen.add(t)
                fine.append(k)
    if fine:
        Kf = np.array(fine)
        vf = _averages(f, centers(Kf), quad)
        best_v = np.concatenate([vc, vf])
        best_K = np.concatenate([Kc, Kf])
    j = int(np.argmax(best_v))
    return float(best_v[j]), center + best_K[j] * cfg.search_step


def maximal_value(f: _Field, sample: ParamSample, cfg: MaximalConfig) -> float:
    """max over the x_bar search grid of tube_average(f, H((x_bar, x_tail), r))."""
    _check_field_resolution(f, cfg.delta)
    if f.dim != cfg.d:
        raise InvalidInput("field and configuration dimensions differ")
    return _search(f, sample, cfg)[0]


def maximizer(f: _Field, sample: ParamSample, cfg: MaximalConfig) -> tuple[float, np.ndarray]:
    """(maximal value, the x_bar attaining it on the search grid)."""
    _check_field_resolution(f, cfg.delta)
    return _search(f, sample, cfg)


@dataclass(frozen=True, eq=False)
class MaximalSurface:
    """Maximal function values on the parameter grid, shape = lengths of cfg.param_axes()."""

    values: np.ndarray
    config: MaximalConfig
    axes: list = field(default_factory=list)

    def __post_init__(self):
        if not self.axes:
            object.__setattr__(self, "axes", self.config.param_axes())
        shape = tuple(a.size for a in self.axes)
        if self.values.shape != shape:
            raise InvalidInput(f"surface shape {self.values.shape} does not match the grid {shape}")

    def cell_weights(self) -> np.ndarray:
        """Trapezoid (clipped Voronoi cell) volumes; they sum to the parameter box volume."""
        w = np.ones(())
        for a in self.axes:
            if a.size == 1:
                wa = np.ones(1)
            else:
                gaps = np.diff(a)
                wa = np.zeros(a.size)
                wa[:-1] += gaps / 2
                wa[1:] += gaps / 2
            w = np.multiply.outer(w, wa)
        return w

    def to_csv(self, path) -> None:
        s = self.config.s
        mesh = np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1).reshape(-1, len(self.axes))
        names = [f"x{s + 1 + i}" for i in range(len(self.axes) - 1)] + ["r", "value"]
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(names)
            for row, v in zip(mesh, self.values.reshape(-1)):
                wr.writerow([repr(float(x)) for x in row] + [repr(float(v))])


def maximal_surface(f: _Field, cfg: MaximalConfig, samples: Optional[Sequence[ParamSample]] = None,
                    workers: int = 1) -> MaximalSurface:
    """Evaluate maximal_value at every parameter-grid node."""
    _check_field_resolution(f, cfg.delta)
    samples = cfg.param_samples() if samples is None else list(samples)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = list(pool.map(lambda p: _search(f, p, cfg)[0], samples))
    else:
        vals = [_search(f, p, cfg)[0] for p in samples]
    shape = tuple(a.size for a in cfg.param_axes())
    return MaximalSurface(np.asarray(vals).reshape(shape), cfg)


def maximal_lp_norm(surface: MaximalSurface, p: float) -> float:
    """Discrete L^p norm over the parameter grid with cell-volume weights."""
    if not p >= 1:
        raise InvalidExponent(f"p must be >= 1, got {p}")
    v = np.abs(surface.values)
    if math.isinf(p):
        return float(v.max())
    return float(np.sum(surface.cell_weights() * v**p) ** (1.0 / p))


# -- the smoothed operator ------------------------------------------------------------


def smooth_average(f: _Field, x, r: float, delta: float, cut, nodes_per_slab: int = 8) -> float:
    """chi1(r) times the double integral of f(x + r gamma(u) + (0, t)) psi_delta(t) chi0(u).

    f is piecewise constant on voxels, so the t-integral over each voxel column
    is exact through differences of the psi1 distribution function; in u the
    integral is split at the voxel slab boundaries and each piece gets a
    Gauss-Legendre rule.
    """
    from .multiplier import chi0, chi1

    x = np.asarray(x, dtype=float)
    d = f.dim
    if x.shape != (d,) or cut.d != d:
        raise InvalidInput("point, field and cutoffs must share the dimension")
    _check_field_resolution(f, delta)
    c1 = float(chi1(r))
    if c1 == 0.0:
        return 0.0
    g = f.grid
    flat, vals = f.nonzero()
    if flat.size == 0:
        return 0.0
    i1 = flat // (g.size // g.shape[0])
    slabs = np.unique(i1)
    # u-interval of each occupied slab, clipped to the support of chi0
    a = (g.lo[0] + slabs * g.spacing[0] - x[0]) / r
    b = (g.lo[0] + (slabs + 1) * g.spacing[0] - x[0]) / r
    a, b = np.maximum(a, -2.0), np.minimum(b, 2.0)
    ok = b > a
    slabs, a, b = slabs[ok], a[ok], b[ok]
    if slabs.size == 0:
        return 0.0
    gx, gw = roots_legendre(nodes_per_slab)
    half = (b - a) / 2
    u = ((a + b) / 2)[:, None] + half[:, None] * gx[None]
    wu = half[:, None] * gw[None] * chi0(u)
    # distribution-function weights of each voxel row along the vertical axes
    ptail = x[1:] + r * gamma_point(u.reshape(-1), d)[:, 1:]
    W = []
    for k in range(1, d):
        edges = g.lo[k] + np.arange(g.shape[k] + 1) * g.spacing[k]
        F = cut.psi1_cdf((edges[None, :] - ptail[:, k - 1:k]) / delta)
        W.append(np.diff(F, axis=1).reshape(slabs.size, nodes_per_slab, g.shape[k]))
    total = 0.0
    if isinstance(f, ScalarField):
        vol = f.values
        for j, sl in enumerate(slabs):
            col = np.asarray(vol[sl], dtype=float)
            # contract the column with the row weights of every node in the slab
            acc = np.einsum("mj,j...->m...", W[0][j], col)
            for k in range(1, d - 1):
                acc = np.einsum("mj...,mj->m...", acc, W[k][j])
            total += float(wu[j] @ acc)
    else:
        coords = np.stack(np.unravel_index(flat, g.shape), axis=-1)
        starts = np.searchsorted(i1, slabs)
        ends = np.searchsorted(i1, slabs, side="right")
        for j in range(slabs.size):
            cc = coords[starts[j]:ends[j]]
            prod = np.broadcast_to(vals[starts[j]:ends[j]], (nodes_per_slab, cc.shape[0])).copy()
            for k in range(d - 1):
                prod *= W[k][j][:, cc[:, k + 1]]
            total += float(wu[j] @ prod.sum(axis=1))
    return c1 * total
