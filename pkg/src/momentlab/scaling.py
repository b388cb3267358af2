"""Scale ladders, log-log exponent fits and box-counting dimension."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, EmptySet, FitDomainError, InvalidInput

MIN_FIT_ROWS = 4


@dataclass(frozen=True)
class LadderResult:
    """Rows (scale, value, stderr) with the scale strictly decreasing.

    The scale is delta for geometric ladders and the frequency R for decay
    profiles; ``scale`` names the column. ``failures`` lists (scale, message)
    for points that raised.
    """

    rows: tuple
    experiment_id: str
    seed: int = 0
    scale: str = "delta"
    failures: tuple = field(default=())

    def __post_init__(self):
        rows = tuple((float(a), float(b), float(c)) for a, b, c in self.rows)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "failures", tuple((float(a), str(m)) for a, m in self.failures))
        sc = [r[0] for r in rows]
        if any(b >= a for a, b in zip(sc, sc[1:])):
            raise InvalidInput(f"{self.scale} values must be strictly decreasing")
        if any(not (r[1] >= 0) for r in rows):
            raise InvalidInput("ladder values must be nonnegative")

    @property
    def scales(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows])

    @property
    def values(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])

    @property
    def stderrs(self) -> np.ndarray:
        return np.array([r[2] for r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow([self.scale, "value", "stderr"])
        for row in self.rows:
            wr.writerow([repr(v) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, experiment_id: str = "", seed: int = 0) -> "LadderResult":
        rd = csv.reader(io.StringIO(text))
        head = next(rd)
        rows = [tuple(float(v) for v in r) for r in rd if r]
        return cls(tuple(rows), experiment_id, seed, head[0])


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    r_squared: float
    slope_stderr: float

    def verdict(self, target: float, tol: float) -> dict:
        ok = abs(self.slope - target) <= tol
        return {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared,
                "slope_stderr": self.slope_stderr, "target": target, "tolerance": tol,
                "verdict": "PASS" if ok else "FAIL"}


def loglog_fit(x, y, sigma=None) -> ScalingFit:
    """Least squares of log y on log x; sigma are standard errors of log y.

    With sigma the fit is weighted and the slope error comes from the weights,
    inflated by the reduced chi-square when the scatter exceeds them.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise FitDomainError("need at least two points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitDomainError("log-log fit needs positive values")
    X = np.log(x)
    Y = np.log(y)
    if sigma is None:
        w = np.ones_like(X)
    else:
        w = 1.0 / np.asarray(sigma, dtype=float) ** 2
    A = np.stack([X, np.ones_like(X)], axis=1)
    Aw = A * w[:, None]
    cov = np.linalg.inv(A.T @ Aw)
    slope, icpt = cov @ (Aw.T @ Y)
    res = Y - (slope * X + icpt)
    dof = X.size - 2
    ss_res = float(np.sum(w * res**2))
    ybar = float(np.sum(w * Y) / np.sum(w))
    ss_tot = float(np.sum(w * (Y - ybar) ** 2))
    r2 = 1.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    if sigma is None:
        var = ss_res / dof * cov[0, 0] if dof > 0 else 0.0
    else:
        var = cov[0, 0] * (max(1.0, ss_res / dof) if dof > 0 else 1.0)
    return ScalingFit(float(slope), float(icpt), float(r2), float(math.sqrt(max(var, 0.0))))


def fit_exponent(ladder: LadderResult) -> ScalingFit:
    """Weighted log-log fit of value against scale; the slope is the empirical exponent.

    Weights are (value/stderr)^2. If any row has zero stderr the fit is unweighted.
    """
    if len(ladder.rows) < MIN_FIT_ROWS:
        raise FitDomainError(f"need at least {MIN_FIT_ROWS} rows, got {len(ladder.rows)}")
    v = ladder.values
    if np.any(v <= 0):
        raise FitDomainError("nonpositive values cannot be fitted on a log scale")
    se = ladder.stderrs
    sigma = None if np.any(se <= 0) else se / v
    return loglog_fit(ladder.scales, v, sigma)


def predicted_exponents(s: int, d: int, p: float) -> dict:
    """Target exponents for the experiments, for s sup parameters in dimension d."""
    if d < 2 or not (1 <= s <= d):
        raise ConfigError(f"need d >= 2 and 1 <= s <= d, got s={s}, d={d}")
    if not p >= 1:
        raise ConfigError(f"need p >= 1, got {p}")
    sp = d + 1 - s
    return {
        "s": s,
        "d": d,
        "p": p,
        "s_prime": sp,
        "tube_volume": d - 1,
        "tangent_intersection": d - 0.5,
        "transversal_intersection": float(d),
        "field_mass": float(s - 2) if s >= 2 else 0.0,
        "alpha": (s - 2) / p if s >= 2 else 0.0,
        "maximal_norm_deficit": (s - 2) / p if s >= 2 else 0.0,
        "absolute_constant": s == 1,
        "focusing_maximal": 0.5,
        "focusing_mass": d - 0.5,
        "dimension": float(min(sp + 1, d)),
        "p_d": 3.0 if s == d else 4.0 * d - 2.0,
        "sharp_range_min_p": float(max(2 * s, 3)),
    }


@dataclass(frozen=True)
class BoxCountResult:
    scales: tuple
    counts: tuple
    fitted_dimension: float
    fit: Optional[ScalingFit] = None


def box_counts(f, scales: Sequence[float]) -> list:
    """Number of eps-boxes (anchored at the grid origin) holding a positive voxel center."""
    flat, _ = f.nonzero()
    if flat.size == 0:
        raise EmptySet("the field has no positive voxels")
    g = f.grid
    coords = np.stack(np.unravel_index(flat, g.shape), axis=-1)
    out = []
    for eps in scales:
        # voxel center offsets from the grid origin, in units of eps
        idx = np.floor(((coords + 0.5) * g.h) / eps).astype(np.int64)
        # mixed-radix key per box so the unique count runs on a flat array
        ext = idx.max(axis=0) + 1
        key = np.ravel_multi_index(tuple(idx.T), tuple(int(e) for e in ext))
        out.append(int(np.unique(key).size))
    return out


def box_count_dimension(f, scales: Sequence[float], check_window: bool = True) -> BoxCountResult:
    """Slope of log N(eps) against log(1/eps), clipped to [0, d]."""
    scales = sorted((float(e) for e in scales), reverse=True)
    if len(scales) < MIN_FIT_ROWS:
        raise ConfigError(f"need at least {MIN_FIT_ROWS} scales")
    g = f.grid
    if check_window:
        lo, hi = 2 * max(g.spacing), float(np.max(g.hi - g.lo_arr)) / 4
        if scales[-1] < lo * (1 - 1e-9) or scales[0] > hi * (1 + 1e-9):
            raise ConfigError(f"scales must lie in [{lo:.4g}, {hi:.4g}]")
    counts = box_counts(f, scales)
    fit = loglog_fit(1.0 / np.asarray(scales), np.asarray(counts, dtype=float))
    dim = min(float(g.dim), max(0.0, fit.slope))
    return BoxCountResult(tuple(scales), tuple(counts), dim, fit)


def parse_scale_list(text: str) -> list:
    """Comma list of numbers or dyadics like 2^-5, and ranges 2^-3..2^-8 (dyadic steps)."""
    out = []
    for part in str(text).replace(" ", "").split(","):
        if not part:
            continue
        if ".." in part:
            a, b = part.split("..")
            ea, eb = _dyadic_exponent(a), _dyadic_exponent(b)
            step = 1 if eb >= ea else -1
            out.extend(2.0**k for k in range(ea, eb + step, step))
        else:
            out.append(_number(part))
    if not out:
        raise ConfigError("empty scale list")
    return out


def _number(tok: str) -> float:
    if "^" in tok:
        base, exp = tok.split("^")
        return float(base) ** float(exp)
    try:
        return float(tok)
    except ValueError as err:
        raise ConfigError(f"cannot read {tok!r} as a number") from err


def _dyadic_exponent(tok: str) -> int:
    if not tok.startswith("2^"):
        raise ConfigError(f"ranges need dyadic end points like 2^-3, got {tok!r}")
    e = float(tok[2:])
    if e != int(e):
        raise ConfigError(f"dyadic exponent must be an integer, got {tok!r}")
    return int(e)


def run_ladder(experiment) -> LadderResult:
    """Evaluate a registered measurable at every scale of an ExperimentSpec.

    A point that raises a computation error is recorded as a failure; more than
    20% failures aborts with LadderFailed (after writing the partial rows when
    the experiment names an output file).
    """
    from .errors import ComputationError, LadderFailed
    from .experiments import MEASURABLES, ladder_scales

    kind = experiment.kind
    if kind not in MEASURABLES:
        raise ConfigError(f"no ladder measurable for kind {kind!r}")
    scales = ladder_scales(experiment)
    if not scales:
        raise ConfigError("empty scale list")
    measure, scale_name = MEASURABLES[kind]
    rows, failures = [], []
    for sc in sorted(set(scales), reverse=True):
        try:
            value, err = measure(experiment, sc)
            rows.append((sc, value, err))
        except ComputationError as exc:
            failures.append((sc, str(exc)))
    result = LadderResult(tuple(rows), experiment.experiment_id, experiment.seed, scale_name, tuple(failures))
    if len(failures) > 0.2 * len(scales):
        if experiment.output:
            with open(str(experiment.output) + ".partial", "w") as fh:
                fh.write(result.to_csv())
        raise LadderFailed(f"{len(failures)} of {len(scales)} ladder points failed")
    return result
