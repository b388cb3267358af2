"""Experiment registry: one runner per ExperimentSpec kind.

Each runner returns an ExperimentResult with a table (written as CSV), a JSON
record and a list of verdicts. Nothing here reads clocks, so results written to
disk are reproducible byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import calibration
from .config import ExperimentSpec
from .curves import (
    MomentCurve,
    curve_intersections,
    pair_invariants,
    parse_curve,
    planar_intersections,
    project_to_parabola,
    solve_tangent_curve,
)
from .errors import ConfigError
from .scaling import LadderResult, fit_exponent, loglog_fit, predicted_exponents, run_ladder

DEFAULT_DELTAS = "2^-3..2^-8"
HIGH0_DIRECTION = (1.0, 0.01, 0.005)
HIGH1_DIRECTION = (0.0, 0.0, 1.0)
DEFAULT_R_LADDER = "2^4,2^5,2^6,2^7,2^8,2^9,2^10"


@dataclass(frozen=True)
class Verdict:
    """A measured value against a target; relation is '±', '<=' or '>='."""

    label: str
    value: float
    target: float
    tol: float = 0.0
    relation: str = "±"

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.relation == "<=":
            return self.value <= self.target
        if self.relation == ">=":
            return self.value >= self.target
        return abs(self.value - self.target) <= self.tol

    def line(self) -> str:
        goal = f"{self.target:g} ± {self.tol:g}" if self.relation == "±" else f"{self.relation} {self.target:g}"
        return f"{self.label} {self.value:.4g} vs target {goal}: {'PASS' if self.passed else 'FAIL'}"

    def record(self) -> dict:
        return {"label": self.label, "value": self.value, "target": self.target, "tolerance": self.tol,
                "relation": self.relation, "verdict": "PASS" if self.passed else "FAIL"}


@dataclass
class ExperimentResult:
    kind: str
    columns: list
    rows: list
    verdicts: list = field(default_factory=list)
    info: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(self.columns)
        for row in self.rows:
            wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        data = {"kind": self.kind, "columns": self.columns, "rows": [list(r) for r in self.rows],
                "verdicts": [v.record() for v in self.verdicts], "info": self.info}
        return json.dumps(_plain(data), indent=2, sort_keys=True) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _workers(spec: ExperimentSpec) -> int:
    return max(1, spec.integer("workers", 1))


def _curve(spec: ExperimentSpec, key: str, default: str, d: int) -> MomentCurve:
    return parse_curve(spec.text(key, default), d)


def fit_record(ladder: LadderResult, target: float, tol: float) -> dict:
    return fit_exponent(ladder).verdict(target, tol)


def ladder_result(spec: ExperimentSpec, ladder: LadderResult, label: str, target: float, tol: float,
                  relation: str = "±", r2_min: float | None = None) -> ExperimentResult:
    fit = fit_exponent(ladder)
    verdicts = [Verdict(label, fit.slope, target, tol, relation)]
    if r2_min is not None:
        verdicts.append(Verdict(f"{label} r^2", fit.r_squared, r2_min, relation=">="))
    info = {"fit": fit.verdict(target, tol), "failures": [list(f) for f in ladder.failures],
            "scale": ladder.scale, "seed": ladder.seed}
    return ExperimentResult(spec.kind, [ladder.scale, "value", "stderr"], [list(r) for r in ladder.rows],
                            verdicts, info)


# -- ladder measurables ---------------------------------------------------------------------


def measure_tube_volume(spec: ExperimentSpec, delta: float) -> tuple:
    from .tubes import TUBE, tube_volume

    d = spec.integer("d")
    c = _curve(spec, "curve", "@1", d)
    est = tube_volume(c, delta, spec.integer("samples", 10**6), spec.seed,
                      spec.text("method", TUBE), _workers(spec))
    return est.value, est.stderr


def _perturbation(spec: ExperimentSpec, delta: float, d: int):
    frac = spec.number("perturb", 0.0)
    if frac == 0:
        return None
    direction = np.ones(d) / math.sqrt(d)
    return frac * delta * direction


def measure_intersection_volume(spec: ExperimentSpec, delta: float) -> tuple:
    from .tubes import intersection_volume, perturbed_tangency_volume

    d = spec.integer("d")
    c1 = _curve(spec, "c1", "@1", d)
    c2 = _curve(spec, "c2", "@1.5", d)
    n = spec.integer("samples", 10**6)
    offset = _perturbation(spec, delta, d)
    if offset is None:
        est = intersection_volume(c1, c2, delta, n, spec.seed, _workers(spec))
    else:
        est = perturbed_tangency_volume(c1, c2, delta, offset, n, spec.seed, _workers(spec))
    return est.value, est.stderr


def _inflation(spec: ExperimentSpec) -> float:
    return spec.number("inflation", 1.0)


def measure_example_mass(spec: ExperimentSpec, delta: float) -> tuple:
    from .fields import field_lp_norm, focusing_field, union_set_field, union_set_mass

    d = spec.integer("d")
    which = spec.text("set", "union")
    if which == "focusing":
        f = focusing_field(delta, d, c_f=spec.number("c-f", 2.0), sparse=True)
        return field_lp_norm(f, 1), 0.0
    if which != "union":
        raise ConfigError(f"unknown set {which!r}; expected union or focusing")
    sp = d + 1 - spec.integer("s")
    method = spec.text("method", "voxel" if sp == 1 else "monte-carlo")
    if method == "voxel":
        f = union_set_field(sp, delta, d, inflation=_inflation(spec), sparse=True)
        return field_lp_norm(f, 1), 0.0
    if method == "monte-carlo":
        est = union_set_mass(sp, delta, d, _inflation(spec), spec.integer("samples", 2 * 10**5),
                             spec.seed, _workers(spec))
        return est.value, est.stderr
    raise ConfigError(f"unknown method {method!r}; expected voxel or monte-carlo")


def focusing_maximal_value(delta: float, d: int, c_f: float, r_range=(1.25, 1.75), n: int = 4096,
                           seed: int = 0) -> float:
    """sup over r in r_range of M^1_delta applied to the focusing field, at zero tail."""
    from .fields import focusing_field
    from .maximal import MaximalConfig, maximal_surface

    f = focusing_field(delta, d, c_f=c_f)
    cfg = MaximalConfig(d=d, s=1, delta=delta, tail_range=(0.0, 0.0), r_range=tuple(r_range),
                        tube_quadrature_n=n, seed=seed)
    return float(maximal_surface(f, cfg).values.max())


def measure_focusing_maximal(spec: ExperimentSpec, delta: float) -> tuple:
    v = focusing_maximal_value(delta, spec.integer("d"), spec.number("c-f", 2.0),
                               n=spec.integer("quadrature", 4096), seed=spec.seed)
    return v, 0.0


MEASURABLES: dict[str, tuple[Callable, str]] = {
    "tube-volume": (measure_tube_volume, "delta"),
    "intersection-volume": (measure_intersection_volume, "delta"),
    "example-mass": (measure_example_mass, "delta"),
    "maximal": (measure_focusing_maximal, "delta"),
}


def ladder_scales(spec: ExperimentSpec) -> list:
    return spec.numbers("deltas", DEFAULT_DELTAS)


# -- runners ------------------------------------------------------------------------------------


def run_tangency(spec: ExperimentSpec) -> ExperimentResult:
    from .curves import is_tangent

    d = spec.integer("d")
    c = solve_tangent_curve(spec.number("xlast"), spec.number("r"), d)
    hit = is_tangent(c, MomentCurve.unit(d), tol=1e-9)
    t = hit[0]
    res = ExperimentResult("tangency", [f"x{i + 1}" for i in range(d)] + ["r", "t"],
                           [list(c.center) + [c.scale, t]])
    res.info = {"center": list(c.center), "r": c.scale, "t": t,
                "max_delta": max(pair_invariants(c, MomentCurve.unit(d)).deltas)}
    res.notes.append(f"tangent curve {c} touches H(0, 1) at t = {t:.6g}")
    res.verdicts.append(Verdict("max Delta_i", res.info["max_delta"], 1e-10, relation="<="))
    return res


def run_intersect(spec: ExperimentSpec) -> ExperimentResult:
    d = spec.integer("d")
    c1 = _curve(spec, "c1", "@1", d)
    c2 = _curve(spec, "c2", "@1", d)
    roots = planar_intersections(project_to_parabola(c1), project_to_parabola(c2))
    rep = curve_intersections(c1, c2)
    inv = pair_invariants(c1, c2)
    rows = [["planar", t, ""] for t in roots] + [["curve", t, tp] for t, tp, _ in rep.points]
    res = ExperimentResult("intersect", ["kind", "t", "t_prime"], rows)
    res.info = {"planar_roots": list(roots), "intersections": [[t, tp, list(p)] for t, tp, p in rep.points],
                "deltas": list(inv.deltas), "dbar": inv.dbar, "delta_bar": inv.delta_bar}
    res.notes.append(f"planar roots {', '.join(f'{t:.6g}' for t in roots) or 'none'}; "
                     f"{rep.count} intersection(s) of the curves")
    res.verdicts.append(Verdict("intersection count", rep.count, 2, relation="<="))
    return res


def run_tube_volume(spec: ExperimentSpec) -> ExperimentResult:
    d = spec.integer("d")
    ladder = run_ladder(spec)
    return ladder_result(spec, ladder, "tube-volume slope", spec.number("target", d - 1),
                         spec.number("tol", 0.1), r2_min=spec.number("r2-min", 0.999))


def run_intersection_volume(spec: ExperimentSpec) -> ExperimentResult:
    d = spec.integer("d")
    c1 = _curve(spec, "c1", "@1", d)
    c2 = _curve(spec, "c2", "@1.5", d)
    inv = pair_invariants(c1, c2)
    tangent = max(inv.deltas) <= 1e-9 * (1 + inv.dbar)
    target = spec.number("target", d - 0.5 if tangent else float(d))
    ladder = run_ladder(spec)
    label = "tangent-intersection slope" if tangent else "intersection slope"
    res = ladder_result(spec, ladder, label, target, spec.number("tol", 0.15))
    res.info.update({"dbar": inv.dbar, "delta_bar": inv.delta_bar, "tangent": tangent})
    return res


def run_example_mass(spec: ExperimentSpec) -> ExperimentResult:
    d = spec.integer("d")
    s = spec.integer("s")
    pred = predicted_exponents(s, d, 1.0)
    if spec.text("set", "union") == "focusing":
        target, tol = pred["focusing_mass"], 0.15
    else:
        target, tol = pred["field_mass"], (0.1 if s == 1 else 0.2)
    ladder = run_ladder(spec)
    return ladder_result(spec, ladder, "mass slope", spec.number("target", target), spec.number("tol", tol))


def run_maximal(spec: ExperimentSpec) -> ExperimentResult:
    mode = spec.text("mode", "lower-bound")
    if mode == "focusing":
        ladder = run_ladder(spec)
        return ladder_result(spec, ladder, "focusing maximal slope", spec.number("target", 0.5),
                             spec.number("tol", 0.1))
    if mode == "lower-bound":
        return run_lower_bound(spec)
    raise ConfigError(f"unknown maximal mode {mode!r}; expected lower-bound or focusing")


def lower_bound_surface(d: int, s: int, delta: float, inflation: float = 1.0, n: int = 4096,
                        param_stride: int = 1, seed: int = 0, workers: int = 1):
    """maximal_value of the union-set field at the parameter-grid nodes (every stride-th node)."""
    from .fields import union_set_field
    from .maximal import MaximalConfig, maximal_surface

    sp = d + 1 - s
    f = union_set_field(sp, delta, d, inflation=inflation, sparse=sp > 1)
    cfg = MaximalConfig(d=d, s=s, delta=delta, tube_quadrature_n=n, seed=seed)
    samples = cfg.param_samples()[::param_stride]
    if param_stride == 1:
        surf = maximal_surface(f, cfg, workers=workers)
        return list(zip(samples, surf.values.reshape(-1)))
    from .maximal import maximal_value

    return [(p, maximal_value(f, p, cfg)) for p in samples]


def run_lower_bound(spec: ExperimentSpec) -> ExperimentResult:
    d, s = spec.integer("d"), spec.integer("s")
    vals = lower_bound_surface(d, s, spec.number("delta"), _inflation(spec), spec.integer("quadrature", 4096),
                               spec.integer("stride", 1), spec.seed, _workers(spec))
    level = spec.number("level", 0.8)
    frac = float(np.mean([v >= level for _, v in vals]))
    rows = [list(p.tail) + [p.r, v] for p, v in vals]
    cols = [f"x{s + 1 + i}" for i in range(d - s)] + ["r", "value"]
    res = ExperimentResult("maximal", cols, rows)
    res.verdicts.append(Verdict(f"fraction of nodes >= {level:g}", frac, spec.number("fraction", 0.95),
                                relation=">="))
    res.info = {"nodes": len(vals), "fraction": frac, "min": float(min(v for _, v in vals))}
    return res


def dimension_field(which: str, delta: float, d: int = 3, s_prime: int = 1, inflation: float = 1.0):
    from .fields import Grid, constant_field, segment_field, union_set_field

    if which == "union":
        return union_set_field(s_prime, delta, d, inflation=inflation, sparse=True)
    h = delta / 2
    if which == "segment":
        # a one-voxel-thick digital segment: centers within half a voxel diagonal
        a = np.array([-1.0, -0.5, -0.3, 0.2][:d])
        b = np.array([1.0, 0.7, 0.9, -0.4][:d])
        lo = np.minimum(a, b) - 0.1
        hi = np.maximum(a, b) + 0.1
        g = Grid.from_box(lo, hi, spacing=h)
        return segment_field(g, a, b, h * math.sqrt(d) / 2)
    if which == "cube":
        return constant_field(Grid.from_box(np.zeros(d), np.ones(d), spacing=h))
    raise ConfigError(f"unknown set {which!r}; expected union, segment or cube")


def run_dimension(spec: ExperimentSpec) -> ExperimentResult:
    from .scaling import box_count_dimension

    d = spec.integer("d")
    which = spec.text("set")
    sp = spec.integer("s-prime", 1)
    f = dimension_field(which, spec.number("delta"), d, sp, _inflation(spec))
    res = box_count_dimension(f, spec.numbers("scales", "2^-2..2^-6"))
    target = {"union": float(min(sp + 1, d)), "segment": 1.0, "cube": float(d)}[which]
    tol = {"union": 0.25, "segment": 0.15, "cube": 0.1}[which]
    out = ExperimentResult("dimension", ["scale", "count"], [[e, n] for e, n in zip(res.scales, res.counts)])
    out.verdicts.append(Verdict(f"{which} box-counting dimension", res.fitted_dimension,
                                spec.number("target", target), spec.number("tol", tol)))
    out.info = {"fitted_dimension": res.fitted_dimension, "r_squared": res.fit.r_squared}
    return out


def decay_ladder(d: int, ray: str, r: float, R_ladder, direction=None) -> LadderResult:
    from .multiplier import build_cutoffs, cone_decay_profile

    if direction is None:
        direction = {"high0": HIGH0_DIRECTION, "high1": HIGH1_DIRECTION}.get(ray)
        if direction is None:
            raise ConfigError(f"unknown ray {ray!r}; expected high0, high1 or an explicit direction")
        direction = (list(direction) + [0.0] * d)[:d]
    return cone_decay_profile(direction, r, R_ladder, build_cutoffs(d))


def run_multiplier_decay(spec: ExperimentSpec) -> ExperimentResult:
    d = spec.integer("d")
    ray = spec.text("ray", "high0")
    direction = spec.numbers("direction") if spec.has("direction") else None
    ladder = decay_ladder(d, ray, spec.number("r", 1.1), spec.numbers("rs", DEFAULT_R_LADDER), direction)
    if ray == "high1":
        return ladder_result(spec, ladder, "high1 decay slope", spec.number("target", -1.0), 0.0, ">=")
    return ladder_result(spec, ladder, f"{ray} decay slope", spec.number("target", -4.0), 0.0, "<=")


def run_symbol_check(spec: ExperimentSpec) -> ExperimentResult:
    from .multiplier import verify_symbol_conditions

    d = spec.integer("d")
    B = spec.number("b", calibration.get("symbol_B", 0.0) or 1.0)
    ks = [int(k) for k in spec.numbers("ks", "4,5,6,7,8")]
    res = ExperimentResult("symbol-check", ["k", "B_required", "deriv_max", "vol_error", "aa_max", "passes"], [])
    for k in ks:
        rep = verify_symbol_conditions(d, B, k, max_alpha=spec.integer("max-alpha", 4),
                                       samples=spec.integer("samples", 400), seed=spec.seed)
        res.rows.append([k, rep.B_required, rep.deriv_max, rep.vol_error, rep.aa_max, int(rep.passes)])
        res.verdicts.append(Verdict(f"k={k} required B", rep.B_required, B, relation="<="))
    res.info = {"B": B}
    return res


def bernstein_rows(s: int, p: float, Rs, trials: int, seed: int) -> list:
    from .multiplier import bernstein_check

    return [(R, bernstein_check(s, R, p, trials, seed)) for R in Rs]


def run_bernstein(spec: ExperimentSpec) -> ExperimentResult:
    s, p = spec.integer("s"), spec.number("p")
    Rs = spec.numbers("rs", "8,16,32")
    rows = bernstein_rows(s, p, Rs, spec.integer("trials", 100), spec.seed)
    worst = max(v for _, v in rows)
    slope = loglog_fit([R for R, _ in rows], [v for _, v in rows]).slope
    res = ExperimentResult("bernstein", ["R", "worst_ratio"], [list(r) for r in rows])
    const = spec.number("constant", calibration.get("bernstein_C", 10.0))
    res.verdicts += [Verdict("worst Bernstein ratio", worst, const, relation="<="),
                     Verdict("ratio slope in log R", slope, 0.0, 0.1)]
    return res


def run_acceptance(spec: ExperimentSpec) -> ExperimentResult:
    from .acceptance import run_suite

    report = run_suite(spec.text("budget"), spec.seed, _workers(spec))
    res = ExperimentResult("acceptance", ["criterion", "name", "verdict"],
                           [[c["id"], c["name"], c["verdict"]] for c in report["criteria"]])
    res.info = report
    for c in report["criteria"]:
        res.verdicts.append(Verdict(f"criterion {c['id']} {c['name']}", float(c["verdict"] == "PASS"), 1.0,
                                    relation=">="))
    return res


RUNNERS: dict[str, Callable[[ExperimentSpec], ExperimentResult]] = {
    "tangency": run_tangency,
    "intersect": run_intersect,
    "tube-volume": run_tube_volume,
    "intersection-volume": run_intersection_volume,
    "example-mass": run_example_mass,
    "maximal": run_maximal,
    "dimension": run_dimension,
    "multiplier-decay": run_multiplier_decay,
    "symbol-check": run_symbol_check,
    "bernstein": run_bernstein,
    "acceptance": run_acceptance,
}


def run(spec: ExperimentSpec) -> ExperimentResult:
    spec.validate()
    return RUNNERS[spec.kind](spec)
