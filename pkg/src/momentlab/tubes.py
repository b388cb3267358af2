"""Volumes of delta-neighborhoods of moment curves and of their pairwise intersections."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import calibration
from .curves import (
    MomentCurve,
    PairInvariants,
    is_degenerate_pair,
    is_tangent,
    pair_invariants,
    vertical_constant,
    within_tube,
)
from .errors import ConfigError, DegeneratePair, InvalidDelta
from .sampling import map_chunks, uniform_ball

BOX = "monte-carlo-box"
TUBE = "tube-parametrized"
MIN_SAMPLES = 10**4


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float
    n_samples: int
    method: str
    hits: int = 0
    region_volume: float = 0.0

    @property
    def upper95(self) -> float:
        """One-sided 95% upper bound; the rule of three when nothing was hit."""
        if self.hits == 0:
            return 3.0 * self.region_volume / self.n_samples
        return self.value + 1.645 * self.stderr


@dataclass(frozen=True)
class BoundEvaluation:
    bound_value: float
    constant_calibrated: float
    regime: str


def check_delta(delta: float) -> float:
    if not (0.0 < delta < 0.25):
        raise InvalidDelta(f"delta must lie in (0, 1/4), got {delta}")
    return float(delta)


def _check_n(n: int) -> int:
    if int(n) != n or n < MIN_SAMPLES:
        raise ConfigError(f"need at least {MIN_SAMPLES} samples, got {n}")
    return int(n)


def ball_volume(k: int) -> float:
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


def bounding_box(c: MomentCurve, pad: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned box of the arc: odd powers span [-1, 1], even powers [0, 1]."""
    i = np.arange(1, c.dim + 1)
    lo = np.where(i % 2 == 1, -1.0, 0.0)
    return c.x + c.scale * lo - pad, c.x + c.scale + pad


def _finish(totals: np.ndarray, n: int, method: str) -> VolumeEstimate:
    s1, s2, hits, sw = totals
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0)
    region = sw / n
    stderr = math.sqrt(var / n) if hits > 0 else region / n
    return VolumeEstimate(float(mean), float(stderr), n, method, int(hits), float(region))


def _box_estimate(curves, delta, n, seed, exp_id, workers) -> VolumeEstimate:
    los, his = zip(*(bounding_box(c, delta) for c in curves))
    lo = np.max(los, axis=0)
    hi = np.min(his, axis=0)
    if np.any(hi <= lo):
        return VolumeEstimate(0.0, 0.0, n, BOX, 0, 0.0)
    vol = float(np.prod(hi - lo))

    def work(rng, size):
        y = lo + (hi - lo) * rng.random((size, len(lo)))
        m = np.ones(size, dtype=bool)
        for c in curves:
            m &= within_tube(y, c, delta)
        k = int(m.sum())
        return [vol * k, vol * vol * k, k, vol * size]

    totals = map_chunks(work, n, seed, exp_id, workers).sum(axis=0)
    return _finish(totals, n, BOX)


def _u_cells(c1: MomentCurve, c2: MomentCurve | None, delta: float, ngrid: int = 4096):
    """u-intervals of c1's vertical tube that can meet the tube of c2.

    Any y in both tubes has a c1-parameter u and a c2-parameter u' sharing its
    first coordinate, and the vertical gap V(u) = c1~(u) - c2~(u') is at most
    (C1 + C2) * delta. A grid cell is dropped only if both endpoints violate that
    bound by more than the Lipschitz slack, so no part of the intersection is lost.
    """
    d, r1 = c1.dim, c1.scale
    U1 = 1.0 + delta / r1
    if c2 is None:
        return np.array([-U1]), np.array([2 * U1])
    r2 = c2.scale
    U2 = 1.0 + delta / r2
    u = np.linspace(-U1, U1, ngrid + 1)
    eta = u[1] - u[0]
    up = (c1.center[0] + r1 * u - c2.center[0]) / r2
    gap = c1.points(u)[:, 1:] - c2.points(up)[:, 1:]
    V = np.linalg.norm(gap, axis=1)
    bound = (vertical_constant(d, 1 + 2 * delta / r1) + vertical_constant(d, 1 + 2 * delta / r2)) * delta
    lip = r1 * (vertical_constant(d, U1) + vertical_constant(d, U2 + eta * r1 / r2))
    okv = V <= bound + lip * eta
    cell_v = okv[:-1] | okv[1:]
    lo_up = np.minimum(up[:-1], up[1:])
    hi_up = np.maximum(up[:-1], up[1:])
    cell_u = (hi_up >= -U2) & (lo_up <= U2)
    keep = np.flatnonzero(cell_v & cell_u)
    return u[keep], np.full(keep.size, eta)


def _tube_estimate(c1, others, delta, n, seed, exp_id, workers, cells) -> VolumeEstimate:
    starts, widths = cells
    if starts.size == 0:
        return VolumeEstimate(0.0, 0.0, n, TUBE, 0, 0.0)
    d, r = c1.dim, c1.scale
    total_len = float(widths.sum())
    cum = np.cumsum(widths) / total_len
    vk = ball_volume(d - 1)

    def work(rng, size):
        k = np.minimum(np.searchsorted(cum, rng.random(size), side="right"), starts.size - 1)
        u = starts[k] + widths[k] * rng.random(size)
        rad = vertical_constant(d, np.abs(u) + delta / r) * delta
        y = c1.points(u)
        y[:, 1:] += uniform_ball(rng, size, d - 1) * rad[:, None]
        w = r * total_len * vk * rad ** (d - 1)
        m = within_tube(y, c1, delta)
        for c in others:
            m &= within_tube(y, c, delta)
        wm = w * m
        return [wm.sum(), (wm * wm).sum(), int(m.sum()), w.sum()]

    totals = map_chunks(work, n, seed, exp_id, workers).sum(axis=0)
    return _finish(totals, n, TUBE)


def tube_volume(c: MomentCurve, delta: float, n: int = 10**6, seed: int = 0,
                method: str = BOX, workers: int = 1) -> VolumeEstimate:
    """Lebesgue measure of the delta-neighborhood of H(x, r).

    method "monte-carlo-box" samples the inflated bounding box; "tube-parametrized"
    samples y = c(u) + (0, s) over the vertical tube and weights by the Jacobian r.
    """
    check_delta(delta)
    n = _check_n(n)
    if method == BOX:
        return _box_estimate([c], delta, n, seed, "tube-volume", workers)
    if method == TUBE:
        return _tube_estimate(c, [], delta, n, seed, "tube-volume", workers, _u_cells(c, None, delta))
    raise ConfigError(f"unknown method {method!r}")


def intersection_volume(c1: MomentCurve, c2: MomentCurve, delta: float, n: int = 10**6,
                        seed: int = 0, workers: int = 1, method: str = TUBE) -> VolumeEstimate:
    """Measure of H_delta(c1) intersected with H_delta(c2)."""
    check_delta(delta)
    n = _check_n(n)
    if is_degenerate_pair(c1, c2):
        raise DegeneratePair("the two curves coincide")
    if method == BOX:
        return _box_estimate([c1, c2], delta, n, seed, "intersection-volume", workers)
    if method == TUBE:
        return _tube_estimate(c1, [c2], delta, n, seed, "intersection-volume", workers,
                              _u_cells(c1, c2, delta))
    raise ConfigError(f"unknown method {method!r}")


def perturbed_tangency_volume(c1: MomentCurve, c2: MomentCurve, delta: float, offset,
                              n: int = 10**6, seed: int = 0, workers: int = 1) -> VolumeEstimate:
    """intersection_volume after shifting c1's center by a tiny offset z - x."""
    check_delta(delta)
    offset = np.asarray(offset, dtype=float)
    if offset.shape != (c1.dim,):
        raise ConfigError("offset must have one entry per coordinate")
    limit = delta / (1000 * c1.dim)
    if np.linalg.norm(offset) > limit * (1 + 1e-12):
        raise ConfigError(f"perturbation {np.linalg.norm(offset):.3g} exceeds delta/(1000 d) = {limit:.3g}")
    if is_tangent(c1, c2, tol=1e-9) is None:
        raise ConfigError("the unperturbed curves must be exactly tangent")
    if pair_invariants(c1, c2).dbar < 0.1:
        raise ConfigError("the tangent pair must be well separated in parameter space (dbar >= 0.1)")
    return intersection_volume(c1.translated(offset), c2, delta, n, seed, workers)


def analytic_intersection_bound(inv: PairInvariants, delta: float) -> BoundEvaluation:
    """delta^d / sqrt((delta + Delta_bar)(delta + d_bar)) with unit constant."""
    if not delta > 0:
        raise InvalidDelta("delta must be positive")
    d = inv.dim
    value = delta**d / math.sqrt((delta + inv.delta_bar) * (delta + inv.dbar))
    if inv.dbar <= delta:
        regime = "near-coincident"
    elif inv.delta_bar <= delta:
        regime = "tangent"
    else:
        regime = "transversal"
    return BoundEvaluation(value, calibration.get("intersection_bound_C", float("nan")), regime)
