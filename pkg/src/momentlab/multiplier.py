"""Fourier-side checks for the averaging operator along moment curves.

Cutoff functions, the oscillatory factor of the averaging multiplier, its
low / high0 / high1 frequency splitting, symbol-condition sampling, Bernstein
ratios of band-limited fields, and decay profiles along frequency rays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import gmpy2
import numpy as np
from scipy.integrate import cumulative_simpson, quad
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq
from scipy.special import roots_legendre

from .curves import _check_dim, gamma_derivative, vertical_constant
from .errors import ConfigError, InvalidInput, QuadratureError
from .sampling import stream_rng

GL_NODES = 16
REL_TOL = 1e-6
# absolute part of the convergence test, relative to the L1 norm of chi0; values
# below this are at the rounding floor of a sum over ~10^6 oscillating terms
ABS_FLOOR = 1e-12
TABLE_HALF_WIDTH = 64.0
TABLE_STEP = 1.0 / 128


# -- smooth cutoffs -------------------------------------------------------------


def _e(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    with np.errstate(over="ignore"):
        out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    a = _e(x)
    b = _e(1.0 - np.asarray(x, dtype=float))
    return a / (a + b)


def plateau(x, inner: float, outer: float):
    """Even bump equal to 1 on |x| <= inner and 0 on |x| >= outer."""
    return smooth_step((outer - np.abs(np.asarray(x, dtype=float))) / (outer - inner))


def chi0(u):
    """1 on [-1.5, 1.5], supported in [-2, 2]."""
    return plateau(u, 1.5, 2.0)


def chi1(r):
    """1 on [1/2, 2], supported in [1/4, 3]."""
    r = np.asarray(r, dtype=float)
    return smooth_step((r - 0.25) / 0.25) * smooth_step(3.0 - r)


def a1(t):
    """1 on |t| <= 1, supported in |t| <= 2."""
    return plateau(t, 1.0, 2.0)


def bump(xi):
    """exp(-1/(1 - 4 xi^2)) on (-1/2, 1/2), zero elsewhere."""
    xi = np.asarray(xi, dtype=float)
    q = 1.0 - 4.0 * xi * xi
    out = np.zeros_like(xi)
    pos = q > 0
    out[pos] = np.exp(-1.0 / q[pos])
    return out


def default_kappa(d: int) -> float:
    """Cone constant making |xi_1 + sum_i i u^(i-1) xi_i| >= |xi_1|/2 for |u| <= 1.5.

    4 d 1.5^(d-1) suffices up to d = 5; Cauchy-Schwarz gives the second term,
    which is the binding one from d = 6 on.
    """
    i = np.arange(2, d + 1)
    cs = 2.0 * float(np.sqrt(np.sum((i * 1.5 ** (i - 1.0)) ** 2)))
    return max(4.0 * d * 1.5 ** (d - 1), cs)


@lru_cache(maxsize=None)
def _psi_tables():
    """phi = inverse transform of the bump on a y-grid, phi^2, its running integral,
    and the autocorrelation b*b (the transform of phi^2) on [-1, 1]."""
    x, w = roots_legendre(1024)
    xi = (x + 1.0) / 4.0
    bw = bump(xi) * (w / 4.0)
    y = np.arange(0.0, TABLE_HALF_WIDTH + TABLE_STEP / 2, TABLE_STEP)
    phi = np.concatenate([2.0 * np.cos(2 * np.pi * np.outer(y[k:k + 2048], xi)) @ bw
                          for k in range(0, y.size, 2048)])
    y = np.concatenate([-y[:0:-1], y])
    phi2 = np.concatenate([phi[:0:-1] ** 2, phi**2])
    cdf = cumulative_simpson(phi2, x=y, initial=0.0)
    eta = np.linspace(-1.0, 1.0, 4001)
    xg, wg = roots_legendre(256)
    conv = np.empty_like(eta)
    for k, e in enumerate(eta):
        lo, hi = max(-0.5, e - 0.5), min(0.5, e + 0.5)
        if hi <= lo:
            conv[k] = 0.0
            continue
        s = lo + (hi - lo) * (xg + 1) / 2
        conv[k] = (hi - lo) / 2 * np.sum(wg * bump(s) * bump(e - s))
    b2, _ = quad(lambda t: float(bump(t)) ** 2, -0.5, 0.5, epsabs=1e-15, epsrel=1e-13)
    return y, phi2, cdf, eta, conv, b2


@dataclass(frozen=True, eq=False)
class CutoffSet:
    """Cutoffs for dimension d.

    psi1(x) = amp * phi(lam x)^2 where phi is the inverse transform of the bump,
    so psi1 >= 0, psi1 >= 1 on [-c_d, c_d] and the transform of psi1 vanishes
    outside [-lam, lam]. psi on R^(d-1) is the tensor product of psi1.
    """

    d: int
    kappa: float
    c_d: float
    lam: float
    amp: float
    chi0_l1: float
    _y: np.ndarray = field(repr=False)
    _phi2: CubicSpline = field(repr=False)
    _cdf: CubicSpline = field(repr=False)
    _cdf_total: float = field(repr=False)
    _hat: CubicSpline = field(repr=False)

    # spatial side
    def psi1(self, x):
        yv = self.lam * np.asarray(x, dtype=float)
        inside = np.abs(yv) <= self._y[-1]
        return np.where(inside, self.amp * np.maximum(self._phi2(np.clip(yv, self._y[0], self._y[-1])), 0.0), 0.0)

    def psi1_cdf(self, x):
        """Integral of psi1 over (-inf, x]."""
        yv = np.clip(self.lam * np.asarray(x, dtype=float), self._y[0], self._y[-1])
        return self.amp / self.lam * self._cdf(yv)

    def psi(self, t):
        t = np.atleast_2d(np.asarray(t, dtype=float))
        return np.prod(self.psi1(t), axis=-1)

    @property
    def psi1_l1(self) -> float:
        return self.amp / self.lam * self._cdf_total

    @property
    def psi_l1(self) -> float:
        return self.psi1_l1 ** (self.d - 1)

    # spectral side
    def psi1_hat(self, zeta):
        e = np.asarray(zeta, dtype=float) / self.lam
        inside = np.abs(e) < 1.0
        return np.where(inside, self.amp / self.lam * np.maximum(self._hat(np.clip(e, -1, 1)), 0.0), 0.0)

    def psi_hat(self, zeta):
        z = np.atleast_2d(np.asarray(zeta, dtype=float))
        return np.prod(self.psi1_hat(z), axis=-1)

    @property
    def psi_hat_support(self) -> float:
        """Euclidean radius outside which the transform of psi vanishes."""
        return self.lam * math.sqrt(self.d - 1)

    # frequency cutoffs
    def a_d(self, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return a1(np.linalg.norm(xi, axis=-1))

    def cone(self, xi):
        """phi(xi) = a1(xi_1 / (kappa |xi~|)); 1 near the xi~ axes, 0 deep in the xi_1 cone."""
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        x1 = np.abs(xi[:, 0])
        tl = np.linalg.norm(xi[:, 1:], axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(tl > 0, x1 / (self.kappa * np.where(tl > 0, tl, 1.0)),
                             np.where(x1 > 0, np.inf, 0.0))
        return a1(np.minimum(ratio, 4.0))

    def annulus(self, xi_tail, k: int):
        """Littlewood-Paley piece phi_k(xi~); phi_0 = a1(|xi~|), and sum over k >= 0 is 1."""
        n = np.linalg.norm(np.atleast_2d(np.asarray(xi_tail, dtype=float)), axis=-1)
        if k == 0:
            return a1(n)
        return a1(2.0**-k * n) - a1(2.0 ** (1 - k) * n)


def build_cutoffs(d: int, kappa: float | None = None) -> CutoffSet:
    d = _check_dim(d)
    kappa = default_kappa(d) if kappa is None else float(kappa)
    if kappa < 4:
        raise ConfigError(f"kappa must be at least 4, got {kappa}")
    return _build(d, kappa)


@lru_cache(maxsize=16)
def _build(d: int, kappa: float) -> CutoffSet:
    y, phi2, cdf, eta, conv, b2 = _psi_tables()
    spline = CubicSpline(y, phi2)
    peak = float(phi2[y.size // 2])
    y_half = brentq(lambda t: float(spline(t)) - peak / 2, 0.0, 1.0, xtol=1e-14)
    # psi1 >= 1 must cover every vertical offset of a tube at |u| <= 1.5
    c_d = vertical_constant(d, 1.5)
    lam = y_half / c_d
    amp = 2.0 / peak
    chi0_l1, _ = quad(lambda u: float(chi0(u)), -2, 2, points=[-1.5, 1.5], epsabs=1e-14, epsrel=1e-13)
    return CutoffSet(d, kappa, c_d, lam, amp, chi0_l1, y, spline, CubicSpline(y, cdf),
                     float(cdf[-1]), CubicSpline(eta, conv))


def psi_spectrum_leak(cut: CutoffSet, step: float = 0.125) -> tuple[float, float]:
    """Discrete-transform oracle: FFT of sampled psi1, returns (peak, max |.| beyond
    the predicted support |zeta| > lam), both in the same units."""
    y, phi2 = _psi_tables()[:2]
    ys = np.arange(-TABLE_HALF_WIDTH, TABLE_HALF_WIDTH, step)
    vals = cut.amp * np.interp(ys, y, phi2)
    spec = np.abs(np.fft.fft(np.fft.ifftshift(vals))) * step / cut.lam
    freq = np.abs(np.fft.fftfreq(ys.size, d=step))  # in units of lam
    out = freq > 1.0 + 2.0 / (ys.size * step)
    return float(spec.max()), float(spec[out].max())


# -- the oscillatory factor -----------------------------------------------------


def _gl_panels(a: float, b: float, panels: int):
    x, w = roots_legendre(GL_NODES)
    edges = np.linspace(a, b, panels + 1)
    half = (edges[1:] - edges[:-1]) / 2
    mid = (edges[1:] + edges[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None]).ravel()
    weights = (half[:, None] * w[None]).ravel()
    return nodes, weights


def _phase_speed(xi: np.ndarray) -> float:
    """Upper bound for |d/du xi . gamma(u)| on [-2, 2]."""
    i = np.arange(1, xi.size + 1)
    return float(np.sum(i * np.abs(xi) * 2.0 ** (i - 1)))


def panel_count(xi, r: float) -> int:
    """Panels for [-2, 2] so the phase turns by at most pi per panel (and at least 32)."""
    xi = np.asarray(xi, dtype=float)
    return max(32, int(math.ceil(8.0 * r * _phase_speed(xi))))


def _integral(xi: np.ndarray, r: float, panels: int) -> complex:
    u, w = _gl_panels(-2.0, 2.0, panels)
    c = chi0(u)
    keep = c > 0
    u, w = u[keep], w[keep] * c[keep]
    total = 0.0 + 0.0j
    for k in range(0, u.size, 2**18):
        uu = u[k:k + 2**18]
        phase = np.zeros_like(uu)
        for x in xi[::-1]:
            phase = (phase + x) * uu
        total += np.sum(w[k:k + 2**18] * np.exp(-2j * np.pi * r * phase))
    return complex(total)


@lru_cache(maxsize=8)
def _gl_mp(n: int, bits: int):
    """Gauss-Legendre nodes and weights on [-1, 1] at the given binary precision."""
    with gmpy2.context(gmpy2.get_context(), precision=bits + 32):
        xs, ws = [], []
        for k in range(1, n + 1):
            x = gmpy2.cos(gmpy2.const_pi() * (k - gmpy2.mpfr(0.25)) / (n + gmpy2.mpfr(0.5)))
            for _ in range(100):
                p0, p1 = gmpy2.mpfr(1), x
                for j in range(2, n + 1):
                    p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
                dp = n * (x * p1 - p0) / (x * x - 1)
                dx = p1 / dp
                x -= dx
                if abs(dx) < gmpy2.mpfr(2) ** -(bits + 16):
                    break
            p0, p1 = gmpy2.mpfr(1), x
            for j in range(2, n + 1):
                p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
            dp = n * (x * p1 - p0) / (x * x - 1)
            xs.append(x)
            ws.append(2 / ((1 - x * x) * dp * dp))
    return xs, ws


def _integral_mp(xi: np.ndarray, r: float, panels: int, bits: int) -> complex:
    """The same panel rule with 24 nodes per panel in multiple precision."""
    X, W = _gl_mp(24, bits)
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        X = [+x for x in X]
        W = [+w for w in W]
        coef = [gmpy2.mpfr(float(v)) for v in xi[::-1]]
        c = -2 * gmpy2.const_pi() * gmpy2.mpfr(float(r))
        half = gmpy2.mpfr(2) / panels
        one, two = gmpy2.mpfr(1), gmpy2.mpfr(2)
        re = gmpy2.mpfr(0)
        im = gmpy2.mpfr(0)
        for k in range(panels):
            m = (2 * k + 1) * half - two
            for x, w in zip(X, W):
                u = m + half * x
                a = abs(u)
                if a >= two:
                    continue
                if a > 1.5:
                    t = (two - a) * 2
                    e1 = gmpy2.exp(-one / t)
                    e2 = gmpy2.exp(-one / (one - t))
                    w = w * e1 / (e1 + e2)
                ph = gmpy2.mpfr(0)
                for v in coef:
                    ph = (ph + v) * u
                s, co = gmpy2.sin_cos(c * ph)
                re += w * co
                im += w * s
        return complex(float(re * half), float(im * half))


def _integral_extended(xi: np.ndarray, r: float, n: int) -> tuple[complex, complex]:
    """Coarse and doubled-panel values, with the precision raised until the result
    sits well above the working precision's rounding level."""
    bits = 128
    for _ in range(6):
        coarse = _integral_mp(xi, r, n, bits)
        mag = abs(coarse)
        if mag > 0 and math.log2(mag) > -(bits - 80):
            return coarse, _integral_mp(xi, r, 2 * n, bits)
        bits = (int(-math.log2(mag)) if mag > 0 else 2 * bits) + 128
    raise QuadratureError(f"no precision resolved the integral at xi={xi}")


def oscillatory_integral(xi: Sequence[float], r: float, cut: CutoffSet, extended: bool = False) -> complex:
    """Integral over u of exp(-2 pi i r xi . gamma(u)) chi0(u).

    Panel Gauss-Legendre; the result at twice the panel count is returned and must
    agree with the base count to 1e-6 relative. In double precision an absolute
    floor of 1e-12 * ||chi0||_1 is allowed for values at rounding level;
    extended=True evaluates in multiple precision, which resolves the
    super-polynomially small values deep in the xi_1 cone.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (cut.d,):
        raise InvalidInput(f"xi must have {cut.d} entries")
    if not (0.25 < r < 3.0):
        raise ConfigError(f"r = {r} lies outside the support (1/4, 3) of chi1")
    n = panel_count(xi, r)
    if extended:
        coarse, fine = _integral_extended(xi, r, n)
        floor = 0.0
    else:
        coarse, fine = _integral(xi, r, n), _integral(xi, r, 2 * n)
        floor = ABS_FLOOR * cut.chi0_l1
    if abs(fine - coarse) > REL_TOL * abs(fine) + floor:
        raise QuadratureError(f"panel doubling changed the integral by {abs(fine - coarse):.3g} at xi={xi}")
    return fine


def at_rounding_level(value: complex, cut: CutoffSet) -> bool:
    """True when a double-precision result is too small to be trusted."""
    return abs(value) < 1e3 * ABS_FLOOR * cut.chi0_l1


@dataclass(frozen=True)
class DecompositionWeights:
    w_low: float
    w_h0: float
    w_h1: float


def decomposition_weights(xi: Sequence[float], cut: CutoffSet) -> DecompositionWeights:
    w = decomposition_weights_rows(np.atleast_2d(np.asarray(xi, dtype=float)), cut)
    return DecompositionWeights(*(float(v) for v in w[0]))


def decomposition_weights_rows(xi: np.ndarray, cut: CutoffSet) -> np.ndarray:
    """(N, 3) array of (w_low, w_h0, w_h1)."""
    a = cut.a_d(xi)
    ph = cut.cone(xi)
    return np.stack([a, (1 - a) * (1 - ph), (1 - a) * ph], axis=-1)


def multiplier_value(xi: Sequence[float], r: float, delta: float, cut: CutoffSet) -> complex:
    """chi1(r) * psi_hat(delta xi~) * oscillatory_integral(xi, r)."""
    xi = np.asarray(xi, dtype=float)
    if not delta > 0:
        raise ConfigError("delta must be positive")
    c1 = float(chi1(r))
    if c1 == 0.0:
        return 0.0 + 0.0j
    ph = float(cut.psi_hat(delta * xi[1:])[0])
    if ph == 0.0:
        return 0.0 + 0.0j
    return c1 * ph * oscillatory_integral(xi, r, cut)


def cone_decay_profile(direction: Sequence[float], r: float, R_ladder: Sequence[float], cut: CutoffSet):
    """|chi1(r) * oscillatory_integral(R * direction / |direction|, r)| for each R,
    the small-delta form of the multiplier (psi_hat set to 1).

    Values that double precision cannot resolve are recomputed in multiple precision.
    """
    from .scaling import LadderResult

    v = np.asarray(direction, dtype=float)
    nv = float(np.linalg.norm(v))
    if v.shape != (cut.d,) or nv == 0:
        raise InvalidInput("direction must be a nonzero vector of length d")
    v = v / nv
    rows = []
    for R in sorted((float(x) for x in R_ladder), reverse=True):
        if R < 0:
            raise InvalidInput("R must be nonnegative")
        val = oscillatory_integral(R * v, r, cut)
        if at_rounding_level(val, cut):
            val = oscillatory_integral(R * v, r, cut, extended=True)
        rows.append((R, abs(float(chi1(r)) * val), 0.0))
    return LadderResult(rows, experiment_id="multiplier-decay", seed=0, scale="R")


def phase_derivative_check(cut: CutoffSet, n: int = 10**6, seed: int = 0) -> int:
    """Violations of |xi_1 + sum_{i>=2} i u^(i-1) xi_i| >= |xi_1|/2 over n samples with
    |xi_1| >= kappa |xi~| and |u| <= 1.5 (a quarter of them on the cone boundary)."""
    d = cut.d
    rng = stream_rng(seed, "phase-derivative")
    u = rng.uniform(-1.5, 1.5, n)
    u[: n // 20] = np.where(rng.random(n // 20) < 0.5, -1.5, 1.5)
    tail = rng.standard_normal((n, d - 1)) * np.exp(rng.uniform(-5, 5, (n, 1)))
    tl = np.linalg.norm(tail, axis=1)
    stretch = 1.0 + rng.exponential(1.0, n)
    stretch[: n // 4] = 1.0
    x1 = np.where(rng.random(n) < 0.5, -1.0, 1.0) * cut.kappa * tl * stretch
    i = np.arange(2, d + 1)
    deriv = x1 + np.sum(i * u[:, None] ** (i - 1) * tail, axis=1)
    return int(np.sum(np.abs(deriv) < np.abs(x1) / 2))


# -- symbol conditions -------------------------------------------------------------


def fd_weights(order: int, half: int) -> np.ndarray:
    """Central finite-difference weights on offsets -half..half (unit step)."""
    if order > 2 * half:
        raise ConfigError("stencil too short for the derivative order")
    j = np.arange(-half, half + 1, dtype=float)
    V = np.vander(j, 2 * half + 1, increasing=True).T
    rhs = np.zeros(2 * half + 1)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(V, rhs)


def _max_1d_derivs(fn, lo: float, hi: float, orders: int, h: float, n: int = 2001) -> np.ndarray:
    half = (orders + 2) // 2 + 1
    x = np.linspace(lo, hi, n)
    offs = np.arange(-half, half + 1) * h
    vals = fn(x[:, None] + offs[None])
    return np.array([np.max(np.abs(vals @ fd_weights(m, half))) / h**m for m in range(orders + 1)])


def _multi_indices(d: int, max_order: int):
    if d == 0:
        yield ()
        return
    for a in range(max_order + 1):
        for rest in _multi_indices(d - 1, max_order - a):
            yield (a,) + rest


@dataclass(frozen=True)
class SymbolReport:
    B_required: float
    deriv_max: float
    vol_parallelepiped: float
    vol_error: float
    aa_max: float
    passes: bool
    k: int
    max_alpha: int


def parallelepiped_volumes(d: int, u) -> np.ndarray:
    """det[gamma'(u), ..., gamma^(d)(u)] at each u."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    M = np.stack([gamma_derivative(u, d, j) for j in range(1, d + 1)], axis=-1)
    return np.linalg.det(M)


def curve_derivative_max(d: int, umax: float = 2.0, n: int = 4001) -> float:
    """max over |u| <= umax and 1 <= j <= 3d+1 of |gamma^(j)(u)|."""
    u = np.linspace(-umax, umax, n)
    return max(float(np.max(np.linalg.norm(gamma_derivative(u, d, j), axis=-1))) for j in range(1, 3 * d + 2))


def symbol_derivative_max(cut: CutoffSet, k: int, max_alpha: int = 4, samples: int = 400,
                          seed: int = 0, rel_step: float = 0.005) -> float:
    """Sampled sup of |d_u^j d_r^l d_xi^alpha a| * |xi|^|alpha|, j <= 1, l <= 2d, |alpha| <= max_alpha,
    for a(u, r, xi) = chi0(u) chi1(r) phi(xi) phi_k(xi~).

    The symbol is a product of a u-factor, an r-factor and a xi-factor, so the
    sup of each mixed partial is the product of the three factor sups.
    """
    d = cut.d
    if k < 1:
        raise ConfigError("k must be at least 1")
    # steps chosen where the estimates have converged to about three digits
    m0 = _max_1d_derivs(chi0, -2.0, 2.0, 1, 1e-3, n=20001)
    m1 = _max_1d_derivs(chi1, 0.25, 3.0, 2 * d, 1e-3, n=20001)
    rng = stream_rng(seed, f"symbol-samples-{d}")
    # points of the support: xi~ in the annulus 2^(k-1) <= |xi~| <= 2^(k+1), |xi_1| <= 2 kappa |xi~|
    g = rng.standard_normal((samples, d - 1))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = 2.0 ** (k + rng.uniform(-1, 1, samples))
    tail = g * rad[:, None]
    x1 = rng.uniform(-2, 2, samples) * cut.kappa * rad
    pts = np.concatenate([x1[:, None], tail], axis=1)
    half = (max_alpha + 2) // 2 + 1
    offs1 = np.arange(-half, half + 1)
    grid = np.stack(np.meshgrid(*[offs1] * d, indexing="ij"), axis=-1).reshape(-1, d)
    W = {m: fd_weights(m, half) for m in range(max_alpha + 1)}
    alphas = [a for a in _multi_indices(d, max_alpha)]
    best = np.zeros(len(alphas))
    for p in pts:
        tl = float(np.linalg.norm(p[1:]))
        # step sizes follow the scale on which each factor varies
        h = np.array([rel_step * cut.kappa * tl] + [rel_step * tl] * (d - 1))
        z = p[None] + grid * h[None]
        vals = (cut.cone(z) * cut.annulus(z[:, 1:], k)).reshape((2 * half + 1,) * d)
        norm = float(np.linalg.norm(p))
        for ia, a in enumerate(alphas):
            t = vals
            for ax in range(d):
                t = np.tensordot(W[a[ax]] / h[ax] ** a[ax], t, axes=([0], [0]))
            best[ia] = max(best[ia], abs(float(t)) * norm ** sum(a))
    return float(np.max(m0)) * float(np.max(m1)) * float(np.max(best))


def verify_symbol_conditions(d: int, B: float, k: int, cut: CutoffSet | None = None,
                             max_alpha: int = 4, samples: int = 400, seed: int = 0) -> SymbolReport:
    """Sample the curve conditions (aa), (bb) and the symbol decay bound at level k."""
    if B < 1:
        raise ConfigError("B must be at least 1")
    cut = cut if cut is not None else build_cutoffs(d)
    u = np.linspace(-2.0, 2.0, 801)
    vols = parallelepiped_volumes(d, u)
    target = float(np.prod([math.factorial(i) for i in range(1, d + 1)]))
    vol_err = float(np.max(np.abs(vols - target)))
    aa = curve_derivative_max(d)
    dmax = symbol_derivative_max(cut, k, max_alpha, samples, seed)
    required = max(aa, dmax)
    ok = bool(B >= required and vol_err <= 1e-9 * target and np.all(vols > 0))
    return SymbolReport(required, dmax, float(vols[0]), vol_err, aa, ok, k, max_alpha)


# -- Bernstein ratios -----------------------------------------------------------------


def _freqs(s: int, N: int) -> np.ndarray:
    f = np.fft.fftfreq(N, d=1.0 / N)
    grids = np.meshgrid(*[f] * s, indexing="ij")
    return np.sqrt(sum(g * g for g in grids))


def bernstein_ratio(F: np.ndarray, R: float, p: float) -> float:
    """||F||_inf / (R^(s/p) ||F||_p) for samples of F on a uniform grid of the unit torus."""
    a = np.abs(F)
    s = F.ndim
    lp = float(np.mean(a**p)) ** (1.0 / p)
    return float(a.max()) / (R ** (s / p) * lp)


def band_limited_field(s: int, R: float, rng: np.random.Generator, oversample: int = 16) -> np.ndarray:
    """Random sum of Gaussian wave packets of width ~1/R, projected onto |xi| <= R.

    The packet parameters are drawn in units of 1/R, so the same rng state gives
    rescaled copies of one field at every R."""
    N = int(oversample * R)
    x = (np.arange(N) + 0.5) / N
    J = int(rng.integers(1, 5))
    F = np.zeros((N,) * s, dtype=complex)
    for _ in range(J):
        c = rng.standard_normal(2) @ np.array([1, 1j])
        ctr = rng.random(s)
        width = rng.uniform(0.5, 3.0) / R
        freq = rng.uniform(-0.5, 0.5, s) * R
        term = np.ones((1,) * s, dtype=complex) * c
        for ax in range(s):
            dx = (x - ctr[ax] + 0.5) % 1.0 - 0.5
            prof = np.exp(-0.5 * (dx / width) ** 2) * np.exp(2j * np.pi * np.round(freq[ax]) * x)
            shape = [1] * s
            shape[ax] = N
            term = term * prof.reshape(shape)
        F += term
    spec = np.fft.fftn(F)
    spec[_freqs(s, N) > R] = 0.0
    return np.fft.ifftn(spec)


def dirichlet_field(s: int, R: float, oversample: int = 16) -> np.ndarray:
    """Sum of all modes with |xi| <= R: the extremal case for the sup-to-L^p ratio."""
    N = int(oversample * R)
    spec = (_freqs(s, N) <= R).astype(complex)
    return np.fft.ifftn(spec) * N**s


def bernstein_check(s: int, R: float, p: float, trials: int = 100, seed: int = 0) -> float:
    """Worst ratio ||F||_inf / (R^(s/p) ||F||_p) over random band-limited fields
    (trial 0 is the Dirichlet kernel)."""
    if not p >= 1:
        raise ConfigError("p must be at least 1")
    if not R >= 1:
        raise ConfigError("R must be at least 1")
    if s not in (1, 2, 3):
        raise ConfigError("s must be 1, 2 or 3")
    worst = bernstein_ratio(dirichlet_field(s, R), R, p)
    for t in range(1, trials):
        rng = stream_rng(seed, f"bernstein-{s}-{t}")
        worst = max(worst, bernstein_ratio(band_limited_field(s, R, rng), R, p))
    return worst
