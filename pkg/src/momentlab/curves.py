"""Moment curves H(x, r) = {x + r*gamma(t) : t in [-1, 1]} and their pairwise geometry.

gamma(t) = (t, t^2, ..., t^d). Every curve is a graph over its first coordinate,
which is what makes the vertical-offset bounds and windowed distance search below
exact rather than heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    DegeneratePair,
    InternalInconsistency,
    InvalidDimension,
    InvalidInput,
    NoAdmissibleTangent,
    OutOfRange,
)

DEGENERATE_TOL = 1e-12
EXTENDED_RANGE = 1.5


def _check_dim(d: int) -> int:
    if int(d) != d or d < 2:
        raise InvalidDimension(f"dimension must be an integer >= 2, got {d!r}")
    return int(d)


def gamma_point(t, d: int) -> np.ndarray:
    """(t, t^2, ..., t^d); vectorized over t (result has a trailing axis of length d)."""
    d = _check_dim(d)
    t = np.asarray(t, dtype=float)
    return t[..., None] ** np.arange(1, d + 1)


def gamma_derivative(t, d: int, order: int = 1) -> np.ndarray:
    """order-th derivative of gamma, vectorized over t."""
    d = _check_dim(d)
    t = np.asarray(t, dtype=float)
    i = np.arange(1, d + 1)
    coef = np.array([math.perm(k, order) if k >= order else 0 for k in i], dtype=float)
    expo = np.maximum(i - order, 0)
    return coef * t[..., None] ** expo


def gamma_tail(t, d: int) -> np.ndarray:
    """(t^2, ..., t^d), the vertical part of gamma."""
    t = np.asarray(t, dtype=float)
    return t[..., None] ** np.arange(2, d + 1)


def vertical_constant(d: int, umax) -> np.ndarray | float:
    """sqrt(1 + max_{|u| <= umax} |gamma~'(u)|^2), gamma~ = last d-1 coordinates.

    A point within rho of x + r*gamma([-1, 1]) whose first coordinate sits at
    parameter u lies within vertical_constant(d, |u| + rho/r) * rho of
    x + r*gamma(u) in the last d-1 coordinates.
    """
    u = np.abs(np.asarray(umax, dtype=float))
    acc = np.ones_like(u)
    for i in range(2, d + 1):
        acc = acc + (i * u ** (i - 1)) ** 2
    out = np.sqrt(acc)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MomentCurve:
    """H(center, scale)."""

    center: tuple
    scale: float

    def __post_init__(self):
        center = tuple(float(v) for v in np.ravel(np.asarray(self.center, dtype=float)))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "scale", float(self.scale))
        _check_dim(len(center))
        if not all(math.isfinite(v) for v in center) or not math.isfinite(self.scale):
            raise InvalidInput("curve parameters must be finite")
        if self.scale <= 0:
            raise InvalidInput(f"scale must be positive, got {self.scale}")

    @classmethod
    def unit(cls, d: int) -> "MomentCurve":
        return cls((0.0,) * _check_dim(d), 1.0)

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.center)

    @property
    def params(self) -> np.ndarray:
        return np.append(self.x, self.scale)

    def translated(self, offset: Sequence[float]) -> "MomentCurve":
        return MomentCurve(self.x + np.asarray(offset, dtype=float), self.scale)

    def points(self, t) -> np.ndarray:
        """Unchecked vectorized evaluation (any real t)."""
        return self.x + self.scale * gamma_point(t, self.dim)

    def derivative(self, t, order: int = 1) -> np.ndarray:
        return self.scale * gamma_derivative(t, self.dim, order)

    def __str__(self) -> str:
        return f"H(({', '.join(f'{v:.6g}' for v in self.center)}), {self.scale:.6g})"


def curve_point(c: MomentCurve, t: float, extended: bool = False) -> np.ndarray:
    limit = EXTENDED_RANGE if extended else 1.0
    if not math.isfinite(t) or abs(t) > limit:
        raise OutOfRange(f"t={t} outside [-{limit}, {limit}]")
    return c.points(t)


def _check_point(p, d: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != d:
        raise InvalidInput(f"point has dimension {p.shape[-1]}, curve has {d}")
    if not np.all(np.isfinite(p)):
        raise InvalidInput("non-finite point coordinates")
    return p


def _sqdist_poly(p: np.ndarray, c: MomentCurve) -> np.polynomial.Polynomial:
    g = np.polynomial.Polynomial([0.0])
    for i in range(1, c.dim + 1):
        coef = np.zeros(i + 1)
        coef[0] = c.center[i - 1] - p[i - 1]
        coef[i] = c.scale
        q = np.polynomial.Polynomial(coef)
        g = g + q * q
    return g


def distance_to_curve(p, c: MomentCurve, tol: float = 1e-10) -> tuple[float, float]:
    """Closest point on the arc to p: returns (t_star, dist).

    The squared distance is a degree-2d polynomial in t. It is sampled at 8d
    Chebyshev nodes plus both endpoints; every node interval where the
    derivative changes sign from - to + is solved by bracketed root finding,
    and every sampled local minimum is also polished by bounded minimization.
    """
    if not tol > 0:
        raise InvalidInput("tol must be positive")
    p = _check_point(p, c.dim)
    g = _sqdist_poly(p, c)
    dg = g.deriv()
    m = 8 * c.dim
    k = np.arange(m)
    nodes = np.concatenate(([-1.0], np.sort(np.cos(np.pi * (2 * k + 1) / (2 * m))), [1.0]))
    vals = g(nodes)
    dvals = dg(nodes)
    cands = [-1.0, 1.0]
    for j in range(len(nodes) - 1):
        if dvals[j] < 0 < dvals[j + 1]:
            cands.append(brentq(dg, nodes[j], nodes[j + 1], xtol=tol, rtol=4 * np.finfo(float).eps))
    for j in range(len(nodes)):
        lo, hi = max(j - 1, 0), min(j + 1, len(nodes) - 1)
        if vals[j] <= vals[lo] and vals[j] <= vals[hi]:
            res = minimize_scalar(g, bounds=(nodes[lo], nodes[hi]), method="bounded",
                                  options={"xatol": tol})
            cands.append(float(res.x))
    cands = np.asarray(cands)
    gv = np.maximum(g(cands), 0.0)
    j = int(np.argmin(gv))
    return float(cands[j]), float(math.sqrt(gv[j]))


def _sqdist_rows(P, X, R, T):
    """|P_n - (X_n + R_n gamma(T_nm))|^2 for P, X (N, d), R (N,), T (N, m)."""
    acc = np.zeros_like(T)
    pw = np.ones_like(T)
    for i in range(P.shape[1]):
        pw = pw * T
        e = (X[:, i] - P[:, i])[:, None] + R[:, None] * pw
        acc += e * e
    return acc


def _newton_rows(P, X, R, t, a, b, iters=8):
    """Safeguarded Newton on the derivative of the squared distance, kept inside [a, b]."""
    for _ in range(iters):
        g1 = np.zeros_like(t)
        g2 = np.zeros_like(t)
        pw_prev = np.ones_like(t)  # t^(i-1)
        pw_prev2 = np.zeros_like(t)  # t^(i-2)
        for i in range(1, P.shape[1] + 1):
            pw = pw_prev * t
            e = X[:, i - 1] + R * pw - P[:, i - 1]
            d1 = R * i * pw_prev
            d2 = R * (i * (i - 1)) * pw_prev2
            g1 += e * d1
            g2 += d1 * d1 + e * d2
            pw_prev2, pw_prev = pw_prev, pw
        pos = g2 > 0
        step = np.where(pos, -g1 / np.where(pos, g2, 1.0), -np.sign(g1) * (b - a) / 4)
        t = np.clip(t + step, a, b)
    return t


def _windowed_min_rows(P, X, R, lo, hi, m, n_starts=1):
    N = P.shape[0]
    s = np.linspace(0.0, 1.0, m)
    T = lo[:, None] + (hi - lo)[:, None] * s
    G = _sqdist_rows(P, X, R, T)
    rows = np.arange(N)
    if n_starts == 1:
        starts = np.argmin(G, axis=1)[:, None]
    else:
        left = np.concatenate([np.full((N, 1), np.inf), G[:, :-1]], axis=1)
        right = np.concatenate([G[:, 1:], np.full((N, 1), np.inf)], axis=1)
        masked = np.where((G <= left) & (G <= right), G, np.inf)
        starts = np.argsort(masked, axis=1)[:, :n_starts]
    jbest = np.argmin(G, axis=1)
    best_t = T[rows, jbest]
    best_g = G[rows, jbest]
    for col in range(starts.shape[1]):
        j = starts[:, col]
        a = T[rows, np.maximum(j - 1, 0)]
        b = T[rows, np.minimum(j + 1, m - 1)]
        t = _newton_rows(P, X, R, T[rows, j], a, b)
        gt = _sqdist_rows(P, X, R, t[:, None])[:, 0]
        better = gt < best_g
        best_t = np.where(better, t, best_t)
        best_g = np.where(better, gt, best_g)
    return best_t, np.sqrt(np.maximum(best_g, 0.0))


def _broadcast_curve(c: MomentCurve, n: int):
    return np.broadcast_to(c.x, (n, c.dim)), np.full(n, c.scale)


def curve_distances(points, c: MomentCurve) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized distance_to_curve for an (N, d) array of points.

    The first coordinate bounds the minimizer: r*|t* - u| <= |p - c(u)| with
    u = clip((p_1 - x_1)/r), so the search is confined to that window.
    """
    P = _check_point(np.atleast_2d(points), c.dim)
    X, R = _broadcast_curve(c, P.shape[0])
    r = c.scale
    u = np.clip((P[:, 0] - c.center[0]) / r, -1.0, 1.0)
    D = np.sqrt(_sqdist_rows(P, X, R, u[:, None])[:, 0])
    lo = np.maximum(u - D / r, -1.0)
    hi = np.minimum(u + D / r, 1.0)
    return _windowed_min_rows(P, X, R, lo, hi, max(9, 8 * c.dim + 1), n_starts=3)


def tube_membership_rows(P, X, R, radius: float) -> np.ndarray:
    """Row-wise test dist(P_n, H(X_n, R_n)) <= radius.

    Rows are rejected when the first coordinate is out of reach or the vertical
    offset exceeds vertical_constant * radius, accepted when the vertical offset
    is at most radius over the arc, and otherwise settled by an exact windowed
    minimization (the minimizer lies within radius / R of the first-coordinate
    parameter).
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    d = P.shape[1]
    u = (P[:, 0] - X[:, 0]) / R
    w = radius / R
    out = np.zeros(P.shape[0], dtype=bool)
    idx = np.flatnonzero(np.abs(u) <= 1.0 + w)
    if idx.size == 0:
        return out
    uc, Rc, wc = u[idx], R[idx], w[idx]
    v2 = np.zeros_like(uc)
    pw = uc.copy()
    for i in range(1, d):
        pw = pw * uc
        e = P[idx, i] - X[idx, i] - Rc * pw
        v2 += e * e
    cl = vertical_constant(d, np.abs(uc) + wc)
    keep = v2 <= (cl * radius) ** 2 * (1 + 1e-12)
    sure = keep & (v2 <= radius * radius) & (np.abs(uc) <= 1.0)
    out[idx[sure]] = True
    amb = keep & ~sure
    if amb.any():
        ia = idx[amb]
        lo = np.maximum(uc[amb] - wc[amb], -1.0)
        hi = np.minimum(uc[amb] + wc[amb], 1.0)
        _, dist = _windowed_min_rows(P[ia], X[ia], R[ia], lo, hi, 9)
        out[ia] = dist <= radius
    return out


def within_tube(points, c: MomentCurve, radius: float) -> np.ndarray:
    """Boolean mask: dist(p, H(x, r)) <= radius, for an (N, d) array of points."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    X, R = _broadcast_curve(c, P.shape[0])
    return tube_membership_rows(P, X, R, radius)


@dataclass(frozen=True)
class PairInvariants:
    deltas: tuple  # Delta_2 .. Delta_d
    dbar: float
    delta_bar: float
    t_candidate: Optional[float]

    @property
    def dim(self) -> int:
        return len(self.deltas) + 1


def _check_pair(c1: MomentCurve, c2: MomentCurve):
    if c1.dim != c2.dim:
        raise InvalidInput(f"dimension mismatch: {c1.dim} vs {c2.dim}")


def pair_invariants(c1: MomentCurve, c2: MomentCurve) -> PairInvariants:
    _check_pair(c1, c2)
    x, xp = c1.x, c2.x
    r, rp = c1.scale, c2.scale
    dx1 = x[0] - xp[0]
    dx1 = float(dx1)
    deltas = tuple(
        float(abs((x[i - 1] - xp[i - 1]) * (rp - r) ** (i - 1) - dx1**i)) for i in range(2, c1.dim + 1)
    )
    dbar = float(abs(dx1) + abs(x[1] - xp[1]) + abs(r - rp))
    delta_bar = deltas[0] / dbar if dbar > 0 else 0.0
    t = dx1 / (rp - r) if r != rp else None
    return PairInvariants(deltas, dbar, delta_bar, t)


def is_degenerate_pair(c1: MomentCurve, c2: MomentCurve) -> bool:
    return bool(np.max(np.abs(c1.params - c2.params)) < DEGENERATE_TOL)


def is_tangent(c1: MomentCurve, c2: MomentCurve, tol: float = 1e-9):
    """(t, point) if the two arcs are tangent at a common parameter t, else None."""
    if not tol > 0:
        raise InvalidInput("tol must be positive")
    _check_pair(c1, c2)
    if is_degenerate_pair(c1, c2):
        raise DegeneratePair("the two curves coincide")
    inv = pair_invariants(c1, c2)
    t = inv.t_candidate
    if t is None or abs(t) > 1.0 + tol:
        return None
    if max(inv.deltas) > tol * (1.0 + inv.dbar):
        return None
    t = float(np.clip(t, -1.0, 1.0))
    return t, c1.points(t)


def solve_tangent_curve(x_last: float, r: float, d: int) -> MomentCurve:
    """The curve H((x_1, ..., x_{d-1}, x_last), r) tangent to H(0, 1).

    Tangency at parameter t forces x_i = (1 - r) t^i for every i.
    """
    d = _check_dim(d)
    if r == 1:
        raise DegeneratePair("r = 1 gives translates of H(0, 1), which are never tangent")
    if not r > 0:
        raise InvalidInput("scale must be positive")
    q = x_last / (1.0 - r)
    if d % 2 == 0 and q < 0:
        raise NoAdmissibleTangent(f"x_last/(1-r) = {q} < 0 has no real root of even degree {d}")
    t = math.copysign(abs(q) ** (1.0 / d), q)
    if abs(t) > 1.0:
        raise NoAdmissibleTangent(f"tangency parameter t = {t:.6g} lies outside [-1, 1]")
    x = [(1.0 - r) * t**i for i in range(1, d)] + [float(x_last)]
    c = MomentCurve(x, r)
    unit = MomentCurve.unit(d)
    hit = is_tangent(c, unit, tol=1e-9)
    if hit is None or abs(hit[0] - t) > 1e-9:
        raise InternalInconsistency(f"constructed curve {c} failed the tangency check")
    return c


@dataclass(frozen=True)
class PlanarParabola:
    """Y = vertex[1] + (X - vertex[0])^2 / scale, X in [vertex[0] - scale, vertex[0] + scale]."""

    vertex: tuple
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "vertex", (float(self.vertex[0]), float(self.vertex[1])))
        if not self.scale > 0:
            raise InvalidInput("parabola scale must be positive")


def project_to_parabola(c: MomentCurve) -> PlanarParabola:
    return PlanarParabola((c.center[0], c.center[1]), c.scale)


def _normalize(p1: PlanarParabola, p2: PlanarParabola) -> tuple[float, float, float]:
    """p2 in the coordinates that turn p1 into the unit parabola Y = X^2."""
    a1, b1 = p1.vertex
    a2, b2 = p2.vertex
    return (a2 - a1) / p1.scale, (b2 - b1) / p1.scale, p2.scale / p1.scale


def planar_intersections(p1: PlanarParabola, p2: PlanarParabola, tol: float = 1e-12) -> list:
    """Parameters t in [-1, 1] of p1 where the two parabolic arcs meet.

    With p1 normalized to Y = X^2 and p2 to vertex (x1, x2), scale r, the
    crossings are the roots of h(t) = (1 - 1/r) t^2 + (2 x1 / r) t - (x2 + x1^2 / r).
    A root also has to sit on p2's arc.
    """
    x1, x2, r = _normalize(p1, p2)
    a = 1.0 - 1.0 / r
    b = 2.0 * x1 / r
    c0 = -(x2 + x1 * x1 / r)
    scale = max(abs(a), abs(b), abs(c0), 1.0)
    if abs(a) <= tol * scale:
        if abs(b) <= tol * scale:
            roots = []
        else:
            roots = [-c0 / b]
    else:
        disc = b * b - 4 * a * c0
        if abs(disc) <= tol * max(b * b, abs(4 * a * c0), tol):
            roots = [-b / (2 * a)]
        elif disc < 0:
            roots = []
        else:
            sq = math.sqrt(disc)
            # stable quadratic formula
            q = -0.5 * (b + math.copysign(sq, b))
            roots = sorted((q / a, c0 / q))
    out = []
    for t in roots:
        tp = (t - x1) / r
        if abs(t) <= 1.0 + 1e-9 and abs(tp) <= 1.0 + 1e-9:
            out.append(float(np.clip(t, -1.0, 1.0)))
    return out


@dataclass(frozen=True)
class IntersectionReport:
    points: tuple  # (t, t', point) triples

    @property
    def count(self) -> int:
        return len(self.points)


def curve_intersections(c1: MomentCurve, c2: MomentCurve, tol: float = 1e-9) -> IntersectionReport:
    _check_pair(c1, c2)
    if is_degenerate_pair(c1, c2):
        raise DegeneratePair("the two curves coincide")
    found = []
    for t in planar_intersections(project_to_parabola(c1), project_to_parabola(c2)):
        p = c1.points(t)
        tp = (p[0] - c2.center[0]) / c2.scale
        if abs(tp) > 1.0 + tol:
            continue
        tp = float(np.clip(tp, -1.0, 1.0))
        q = c2.points(tp)
        if np.max(np.abs(p - q)) <= tol * (1.0 + np.max(np.abs(p))):
            found.append((t, tp, p))
    if len(found) > 2:
        raise InternalInconsistency(f"{len(found)} intersections reported for {c1} and {c2}")
    return IntersectionReport(tuple(found))


def parse_curve(text: str, d: Optional[int] = None) -> MomentCurve:
    """'x1,x2,...,xd@r' -> MomentCurve. A bare '@r' means the origin."""
    try:
        left, _, right = text.partition("@")
        r = float(right) if right else 1.0
        if left.strip():
            center = [float(v) for v in left.split(",")]
        else:
            center = [0.0] * (d or 0)
    except ValueError as exc:
        raise InvalidInput(f"cannot parse curve {text!r}; expected 'x1,...,xd@r'") from exc
    if d is not None and len(center) != d:
        raise InvalidInput(f"curve {text!r} has {len(center)} coordinates, expected {d}")
    return MomentCurve(center, r)


def random_curves(rng: np.random.Generator, d: int, n: int, center_box=1.0,
                  scales: tuple = (0.5, 2.0)) -> list:
    cs = rng.uniform(-center_box, center_box, size=(n, d))
    rs = rng.uniform(*scales, size=n)
    return [MomentCurve(x, r) for x, r in zip(cs, rs)]


def intersecting_pair(rng: np.random.Generator, d: int, scales: tuple = (0.5, 2.0),
                      min_gap: float = 0.0) -> tuple:
    """Unit curve plus a random curve through one of its points.

    c2 = H(gamma(t1) - r' gamma(t2), r') meets H(0, 1) at gamma(t1).
    """
    while True:
        t1, t2 = rng.uniform(-1, 1, size=2)
        if abs(t1 - t2) >= min_gap:
            break
    rp = rng.uniform(*scales)
    x = gamma_point(t1, d) - rp * gamma_point(t2, d)
    return MomentCurve.unit(d), MomentCurve(x, rp)


def arc_length(d: int, scale: float = 1.0) -> float:
    from scipy.integrate import quad

    val, _ = quad(lambda t: np.linalg.norm(gamma_derivative(t, d)), -1, 1, epsabs=1e-13, epsrel=1e-13)
    return scale * val


def iter_pairs(curves: Iterable[MomentCurve]):
    curves = list(curves)
    for i in range(0, len(curves) - 1, 2):
        yield curves[i], curves[i + 1]
