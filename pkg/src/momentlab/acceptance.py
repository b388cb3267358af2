"""The acceptance suite: fifteen criteria, each reduced to a list of checks.

``run_suite`` returns a JSON-ready report that holds no timings, so two runs with
the same seed and budget serialize to identical bytes. Wall times go only to the
human table. ``python -m momentlab.acceptance`` runs the suite from the shell.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import calibration, curves
from .config import ExperimentSpec
from .curves import MomentCurve, intersecting_pair, iter_pairs, random_curves
from .errors import LabError
from .experiments import Verdict, decay_ladder, dimension_field, focusing_maximal_value, lower_bound_surface
from .sampling import stream_rng
from .scaling import LadderResult, box_count_dimension, fit_exponent, loglog_fit, run_ladder

BUDGETS = {
    "quick": {
        "c1_samples": 2 * 10**5, "c2_samples": 10**6, "c3_samples": 2 * 10**5, "c4_pairs": 30,
        "c4_samples": 2 * 10**4, "c5_random": 100, "c5_tangent": 20, "c6_pairs": 2000, "c7_stride": 4,
        "c8_samples": 10**5, "c8_mc_deltas": "2^-6..2^-9", "c11_phase": 10**5, "c11_points": 10**5,
        "c12_samples": 100, "c13_fields": 20, "c13_curves": 10, "c14_trials": 20,
    },
    "full": {
        "c1_samples": 10**6, "c2_samples": 10**7, "c3_samples": 10**6, "c4_pairs": 100,
        "c4_samples": 10**5, "c5_random": 500, "c5_tangent": 50, "c6_pairs": 10**4, "c7_stride": 1,
        "c8_samples": 2 * 10**5, "c8_mc_deltas": "2^-6..2^-10", "c11_phase": 10**6, "c11_points": 10**5,
        "c12_samples": 400, "c13_fields": 100, "c13_curves": 20, "c14_trials": 100,
    },
}

CALIBRATION_SEED = 7_654_321
DELTA_LADDER = "2^-3..2^-8"
C4_DELTAS = (2.0**-4, 2.0**-6, 2.0**-8)
C13_DELTA = 2.0**-4
C14_CASES = ((1, 2.0), (1, 4.0), (2, 2.0), (2, 4.0))
C14_RS = (8.0, 16.0, 32.0)
PARTITION_TOL = 1e-14


@dataclass
class CriterionResult:
    id: int
    name: str
    checks: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    error: str = ""
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.error and bool(self.checks) and all(c.passed for c in self.checks)

    def record(self) -> dict:
        return {"id": self.id, "name": self.name, "verdict": "PASS" if self.passed else "FAIL",
                "checks": [c.record() for c in self.checks], "details": self.details, "error": self.error}

    def line(self) -> str:
        head = f"criterion {self.id:2d} {self.name}: {'PASS' if self.passed else 'FAIL'}"
        if self.error:
            return f"{head} (error: {self.error})"
        return head + " (" + "; ".join(c.line().rsplit(":", 1)[0] for c in self.checks) + ")"


def _spec(kind: str, seed: int, **params) -> ExperimentSpec:
    return ExperimentSpec(kind, {"seed": seed, **params})


def _ladder_check(label, ladder: LadderResult, target, tol, relation="±"):
    fit = fit_exponent(ladder)
    return Verdict(label, fit.slope, target, tol, relation), fit


def _ladder_details(ladder: LadderResult, fit) -> dict:
    return {"rows": [list(r) for r in ladder.rows], "slope": fit.slope, "r_squared": fit.r_squared,
            "slope_stderr": fit.slope_stderr}


# -- criteria --------------------------------------------------------------------------------


def c1_tube_volume(b, seed, workers):
    res = CriterionResult(1, "tube-volume scaling")
    t0 = time.perf_counter()
    ladder = run_ladder(_spec("tube-volume", seed, d=3, deltas=DELTA_LADDER, samples=b["c1_samples"],
                              workers=workers))
    elapsed = time.perf_counter() - t0
    check, fit = _ladder_check("slope", ladder, 2.0, 0.1)
    res.checks += [check, Verdict("r^2", fit.r_squared, 0.999, relation=">="),
                   Verdict("runtime within 120 s", float(elapsed <= 120), 1.0, relation=">=")]
    res.details = _ladder_details(ladder, fit)
    return res


def c2_tangent_intersection(b, seed, workers):
    res = CriterionResult(2, "exact-tangency intersection scaling")
    t0 = time.perf_counter()
    common = dict(d=3, deltas=DELTA_LADDER, samples=b["c2_samples"], workers=workers, c1="@1", c2="@1.5")
    exact = run_ladder(_spec("intersection-volume", seed, **common))
    pert = run_ladder(_spec("intersection-volume", seed, perturb=1 / 4000, **common))
    elapsed = time.perf_counter() - t0
    ce, fe = _ladder_check("exact slope", exact, 2.5, 0.15)
    cp, fp = _ladder_check("perturbed slope", pert, 2.5, 0.2)
    res.checks += [ce, cp, Verdict("runtime within 900 s", float(elapsed <= 900), 1.0, relation=">=")]
    res.details = {"exact": _ladder_details(exact, fe), "perturbed": _ladder_details(pert, fp)}
    return res


def transversal_pair(seed: int) -> tuple:
    """First seeded intersecting pair with Delta_bar >= 0.3 and d_bar >= 0.3."""
    rng = stream_rng(seed, "transversal-pair")
    while True:
        c1, c2 = intersecting_pair(rng, 3)
        inv = curves.pair_invariants(c1, c2)
        if inv.delta_bar >= 0.3 and inv.dbar >= 0.3:
            return c1, c2


def _curve_text(c: MomentCurve) -> str:
    return ",".join(repr(v) for v in c.center) + "@" + repr(c.scale)


def c3_transversal(b, seed, workers):
    res = CriterionResult(3, "transversal intersection scaling")
    c1, c2 = transversal_pair(seed)
    inv = curves.pair_invariants(c1, c2)
    ladder = run_ladder(_spec("intersection-volume", seed, d=3, deltas=DELTA_LADDER, samples=b["c3_samples"],
                              workers=workers, c1=_curve_text(c1), c2=_curve_text(c2)))
    check, fit = _ladder_check("slope", ladder, 3.0, 0.2)
    res.checks.append(check)
    res.details = {"c2": _curve_text(c2), "delta_bar": inv.delta_bar, "dbar": inv.dbar,
                   **_ladder_details(ladder, fit)}
    return res


def bound_ratios(pairs: int, samples: int, seed: int, workers: int = 1) -> list:
    """(delta, estimate, stderr, bound) for seeded intersecting pairs at the C4 deltas."""
    from .tubes import analytic_intersection_bound, intersection_volume

    rng = stream_rng(seed, "bound-pairs")
    out = []
    for j in range(pairs):
        c1, c2 = intersecting_pair(rng, 3)
        inv = curves.pair_invariants(c1, c2)
        for delta in C4_DELTAS:
            est = intersection_volume(c1, c2, delta, samples, seed + j, workers)
            out.append((delta, est.value, est.stderr, analytic_intersection_bound(inv, delta).bound_value))
    return out


def c4_bound_dominance(b, seed, workers):
    res = CriterionResult(4, "intersection bound dominance")
    C = float(calibration.get("intersection_bound_C"))
    rows = bound_ratios(b["c4_pairs"], b["c4_samples"], seed, workers)
    ok = [v - 3 * se <= C * bd for _, v, se, bd in rows]
    frac = float(np.mean(ok))
    res.checks.append(Verdict("fraction within 3 stderr of C * bound", frac, 0.99, relation=">="))
    res.details = {"C": C, "cases": len(rows), "max_ratio": max(v / bd for _, v, _, bd in rows)}
    return res


def c5_tangency_oracle(b, seed, workers):
    from .oracles import tangency_grid_oracle

    res = CriterionResult(5, "tangency oracle equivalence")
    rng = stream_rng(seed, "tangency-random")
    disagree = 0
    for c1, c2 in iter_pairs(random_curves(rng, 3, 2 * b["c5_random"])):
        fast = curves.is_tangent(c1, c2, tol=1e-6) is not None
        slow = tangency_grid_oracle(c1, c2, tol=1e-6) is not None
        disagree += fast != slow
    rng = stream_rng(seed, "tangency-constructed")
    unit = MomentCurve.unit(3)
    worst, bad = 0.0, 0
    for _ in range(b["c5_tangent"]):
        t = rng.uniform(-0.95, 0.95)
        r = rng.uniform(0.5, 2.0)
        if abs(r - 1) < 0.05:
            r += 0.1
        try:
            c = curves.solve_tangent_curve((1 - r) * t**3, r, 3)
        except LabError:
            bad += 1
            continue
        worst = max(worst, max(curves.pair_invariants(c, unit).deltas))
        fast = curves.is_tangent(c, unit, tol=1e-6) is not None
        slow = tangency_grid_oracle(c, unit, tol=1e-6) is not None
        disagree += (fast != slow) or not fast
    res.checks += [Verdict("disagreements", float(disagree + bad), 0.0, relation="<="),
                   Verdict("max Delta_i of constructed curves", worst, 1e-10, relation="<=")]
    res.details = {"random_pairs": b["c5_random"], "tangent_pairs": b["c5_tangent"],
                   "construction_failures": bad}
    return res


def c6_two_intersections(b, seed, workers):
    from .oracles import grid_intersections

    res = CriterionResult(6, "at most two intersections")
    rng = stream_rng(seed, "intersection-count")
    violations, counts = 0, [0, 0, 0]
    for j in range(b["c6_pairs"]):
        c1, c2 = intersecting_pair(rng, 3) if j % 2 == 0 else tuple(random_curves(rng, 3, 2))
        try:
            n = curves.curve_intersections(c1, c2).count
        except LabError:
            violations += 1
            continue
        planar = len(curves.planar_intersections(curves.project_to_parabola(c1), curves.project_to_parabola(c2)))
        scan = len(grid_intersections(c1, c2))
        violations += max(n, planar, scan) > 2
        counts[min(n, 2)] += 1
    res.checks.append(Verdict("violations", float(violations), 0.0, relation="<="))
    res.details = {"pairs": b["c6_pairs"], "pairs_by_count": counts}
    return res


def c7_sharp_lower_bound(b, seed, workers):
    res = CriterionResult(7, "sharp-example lower bound")
    for s in (2, 3):
        vals = lower_bound_surface(3, s, 2.0**-6, inflation=1.0, n=1024, param_stride=b["c7_stride"],
                                   seed=seed, workers=workers)
        v = np.array([x for _, x in vals])
        frac = float(np.mean(v >= 0.8))
        res.checks.append(Verdict(f"s={s} fraction >= 0.8", frac, 0.95, relation=">="))
        res.details[f"s{s}"] = {"nodes": int(v.size), "fraction": frac, "min": float(v.min())}
    return res


def c8_example_mass(b, seed, workers):
    res = CriterionResult(8, "example mass scaling")
    cases = (
        (3, 1.0, 0.2, dict(method="voxel", deltas="2^-4..2^-7")),
        (2, 0.0, 0.2, dict(method="monte-carlo", deltas=b["c8_mc_deltas"], samples=b["c8_samples"])),
        (1, 0.0, 0.1, dict(method="monte-carlo", deltas=b["c8_mc_deltas"], samples=b["c8_samples"])),
    )
    for s, target, tol, extra in cases:
        ladder = run_ladder(_spec("example-mass", seed, d=3, s=s, inflation=1, workers=workers, **extra))
        check, fit = _ladder_check(f"s={s} slope", ladder, target, tol)
        res.checks.append(check)
        res.details[f"s{s}"] = _ladder_details(ladder, fit)
    return res


def c9_focusing(b, seed, workers):
    res = CriterionResult(9, "focusing example")
    mass = run_ladder(_spec("example-mass", seed, d=3, s=1, set="focusing", deltas=DELTA_LADDER))
    cm, fm = _ladder_check("mass slope", mass, 2.5, 0.15)
    deltas = [2.0**-k for k in range(3, 9)]
    rows = tuple((dl, focusing_maximal_value(dl, 3, 2.0, seed=seed), 0.0) for dl in deltas)
    maxl = LadderResult(rows, "focusing-maximal", seed)
    fx = fit_exponent(maxl)
    res.checks += [cm, Verdict("maximal slope", fx.slope, 0.6, relation="<="),
                   Verdict("maximal slope", fx.slope, 0.4, relation=">=")]
    res.details = {"mass": _ladder_details(mass, fm), "maximal": _ladder_details(maxl, fx)}
    return res


def c10_dimension(b, seed, workers):
    res = CriterionResult(10, "dimension proxy")
    scales = [2.0**-k for k in range(2, 7)]
    cases = (("union", 1, 2.0, 0.25), ("union", 2, 2.9, 0.25), ("segment", 0, 1.0, 0.15), ("cube", 0, 3.0, 0.1))
    for which, sp, target, tol in cases:
        f = dimension_field(which, 2.0**-7, 3, max(sp, 1), 1.0)
        bc = box_count_dimension(f, scales)
        label = f"union s'={sp}" if which == "union" else which
        res.checks.append(Verdict(f"{label} dimension", bc.fitted_dimension, target, tol))
        res.details[label] = {"counts": list(bc.counts), "dimension": bc.fitted_dimension}
    return res


def partition_errors(n: int, seed: int, d: int = 3) -> tuple:
    """Max deviations from 1 of low + high0 + high1 and of the Littlewood-Paley sum."""
    from .multiplier import build_cutoffs, decomposition_weights_rows

    cut = build_cutoffs(d)
    rng = stream_rng(seed, "partition-of-unity")
    xi = rng.standard_normal((n, d)) * np.exp(rng.uniform(-3, 9, (n, 1)))
    w = decomposition_weights_rows(xi, cut)
    e1 = float(np.max(np.abs(w.sum(axis=1) - 1.0)))
    tail = xi[:, 1:]
    K = int(math.ceil(math.log2(np.max(np.linalg.norm(tail, axis=1))))) + 2
    lp = sum(cut.annulus(tail, k) for k in range(K + 1))
    e2 = float(np.max(np.abs(lp - 1.0)))
    return e1, e2


def c11_multiplier(b, seed, workers):
    from .multiplier import build_cutoffs, phase_derivative_check

    res = CriterionResult(11, "multiplier cone contrast")
    Rs = [2.0**k for k in range(4, 11)]
    h0 = decay_ladder(3, "high0", 1.1, Rs)
    h1 = decay_ladder(3, "high1", 1.1, Rs)
    c0, f0 = _ladder_check("high0 slope", h0, -4.0, 0.0, "<=")
    c1, f1 = _ladder_check("high1 slope", h1, -1.0, 0.0, ">=")
    e1, e2 = partition_errors(b["c11_points"], seed)
    viol = phase_derivative_check(build_cutoffs(3), b["c11_phase"], seed)
    res.checks += [c0, c1, Verdict("partition of unity error", e1, PARTITION_TOL, relation="<="),
                   Verdict("Littlewood-Paley sum error", e2, PARTITION_TOL, relation="<="),
                   Verdict("phase-derivative violations", float(viol), 0.0, relation="<=")]
    res.details = {"high0": _ladder_details(h0, f0), "high1": _ladder_details(h1, f1)}
    return res


def c12_symbol(b, seed, workers):
    from .multiplier import verify_symbol_conditions

    res = CriterionResult(12, "symbol and curve conditions")
    B = float(calibration.get("symbol_B"))
    reps = [verify_symbol_conditions(3, B, k, samples=b["c12_samples"], seed=seed) for k in range(4, 9)]
    res.checks += [Verdict("parallelepiped volume error", max(r.vol_error for r in reps), 1e-9, relation="<="),
                   Verdict("(aa) derivative max", reps[0].aa_max, B, relation="<=")]
    res.checks += [Verdict(f"k={r.k} required B", r.B_required, B, relation="<=") for r in reps]
    res.details = {"B": B, "required": {str(r.k): r.B_required for r in reps}}
    return res


def random_field(rng: np.random.Generator, grid, delta: float):
    """A nonnegative test field of one of three kinds: voxel noise, Gaussian bumps, a curve tube."""
    from .fields import ScalarField, tube_indicator_field

    kind = int(rng.integers(3))
    if kind == 0:
        return ScalarField(grid, rng.random(grid.shape) ** 3)
    if kind == 1:
        axes = np.meshgrid(*[grid.centers(k) for k in range(grid.dim)], indexing="ij", sparse=True)
        v = np.zeros(grid.shape)
        for _ in range(int(rng.integers(1, 6))):
            ctr = grid.lo_arr + rng.random(grid.dim) * (grid.hi - grid.lo_arr)
            w = rng.uniform(delta, 0.5)
            v += rng.uniform(0.1, 1) * np.exp(-sum((a - c) ** 2 for a, c in zip(axes, ctr)) / (2 * w * w))
        return ScalarField(grid, v)
    c = MomentCurve(rng.uniform(-0.25, 0.25, grid.dim), rng.uniform(0.5, 2.0))
    return tube_indicator_field(c, delta, box=(grid.lo_arr, grid.hi), spacing=grid.spacing[0])


def domination_ratios(fields: int, curves_per_field: int, seed: int) -> list:
    """tube_average / smooth_average over random fields and curves (skipping zero pairs)."""
    from .fields import Grid
    from .maximal import smooth_average, tube_average
    from .multiplier import build_cutoffs

    cut = build_cutoffs(3)
    grid = Grid.from_box([-1.5, -0.5, -2.5], [1.5, 2.5, 2.5], spacing=C13_DELTA / 2)
    out = []
    for j in range(fields):
        rng = stream_rng(seed, f"domination-{j}")
        f = random_field(rng, grid, C13_DELTA)
        for _ in range(curves_per_field):
            c = MomentCurve(rng.uniform(-0.25, 0.25, 3), rng.uniform(0.5, 2.0))
            ta = tube_average(f, c, C13_DELTA, seed=seed)
            sa = smooth_average(f, c.x, c.scale, C13_DELTA, cut)
            out.append((ta, sa))
    return out


def c13_domination(b, seed, workers):
    res = CriterionResult(13, "smooth domination")
    C = float(calibration.get("C_dom"))
    pairs = domination_ratios(b["c13_fields"], b["c13_curves"], seed)
    viol = sum(ta > C * sa for ta, sa in pairs)
    res.checks.append(Verdict("violations", float(viol), 0.0, relation="<="))
    ratios = [ta / sa for ta, sa in pairs if sa > 0]
    res.details = {"C_dom": C, "checks": len(pairs), "max_ratio": max(ratios) if ratios else 0.0}
    return res


def bernstein_table(trials: int, seed: int) -> dict:
    from .multiplier import bernstein_check

    return {(s, p): [bernstein_check(s, R, p, trials, seed) for R in C14_RS] for s, p in C14_CASES}


def c14_bernstein(b, seed, workers):
    res = CriterionResult(14, "Bernstein property")
    C = float(calibration.get("bernstein_C"))
    for (s, p), vals in bernstein_table(b["c14_trials"], seed).items():
        slope = loglog_fit(C14_RS, vals).slope
        res.checks += [Verdict(f"s={s} p={p:g} worst ratio", max(vals), C, relation="<="),
                       Verdict(f"s={s} p={p:g} slope", slope, 0.0, 0.1)]
        res.details[f"s{s}_p{p:g}"] = vals
    return res


CRITERIA: dict[int, Callable] = {
    1: c1_tube_volume, 2: c2_tangent_intersection, 3: c3_transversal, 4: c4_bound_dominance,
    5: c5_tangency_oracle, 6: c6_two_intersections, 7: c7_sharp_lower_bound, 8: c8_example_mass,
    9: c9_focusing, 10: c10_dimension, 11: c11_multiplier, 12: c12_symbol, 13: c13_domination,
    14: c14_bernstein,
}


def run_criterion(cid: int, budget: str, seed: int = 0, workers: int = 1) -> CriterionResult:
    if budget not in BUDGETS:
        raise ValueError(f"unknown budget {budget!r}")
    t0 = time.perf_counter()
    try:
        res = CRITERIA[cid](BUDGETS[budget], seed, workers)
    except LabError as err:
        res = CriterionResult(cid, CRITERIA[cid].__name__.split("_", 1)[1].replace("_", " "), error=str(err))
    res.seconds = time.perf_counter() - t0
    return res


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _rerun_bytes(budget: str, seed: int, workers: int, only) -> str:
    """The suite's report from a fresh interpreter, so no in-process cache is shared."""
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "report.json"
        cmd = [sys.executable, "-m", "momentlab.acceptance", "--budget", budget, "--seed", str(seed),
               "--workers", str(workers), "--no-determinism", "--json", str(out), "--quiet"]
        if only:
            cmd += ["--only", ",".join(str(c) for c in only)]
        subprocess.run(cmd, check=False, stdout=subprocess.DEVNULL)
        return out.read_text() if out.exists() else ""


def _overall(criteria: list) -> str:
    return "PASS" if all(c["verdict"] == "PASS" for c in criteria) else "FAIL"


def _differing(report: dict, other_text: str) -> list:
    """Ids of criteria whose records differ between a report and another report's text."""
    try:
        other = {c["id"]: c for c in json.loads(other_text)["criteria"]}
    except (ValueError, KeyError):
        return [c["id"] for c in report["criteria"]]
    mine = json.loads(report_json(report))["criteria"]
    return [c["id"] for c in mine if other.get(c["id"]) != c]


def run_suite(budget: str = "quick", seed: int = 0, workers: int = 1, only=None, determinism: bool = True,
              echo: Callable[[str], None] | None = None) -> dict:
    """Run the criteria; criterion 15 reruns the others in a fresh process and compares bytes."""
    ids = sorted(only) if only else sorted(CRITERIA)
    results = []
    for cid in ids:
        if cid == 15:
            continue
        r = run_criterion(cid, budget, seed, workers)
        results.append(r)
        if echo:
            echo(f"{r.line()}  [{r.seconds:.1f} s]")
    report = {"budget": budget, "seed": seed, "criteria": [r.record() for r in results]}
    if determinism and (not only or 15 in only):
        t0 = time.perf_counter()
        # the rerun's report is a complete report over the same criteria, verdict included
        first = report_json({**report, "verdict": _overall(report["criteria"])})
        second = _rerun_bytes(budget, seed, workers, [r.id for r in results])
        r15 = CriterionResult(15, "determinism")
        r15.checks.append(Verdict("identical report bytes", float(first == second), 1.0, relation=">="))
        r15.details = {"criteria_compared": [r.id for r in results], "bytes": len(first),
                       "differing_criteria": _differing(report, second)}
        r15.seconds = time.perf_counter() - t0
        report["criteria"].append(r15.record())
        if echo:
            echo(f"{r15.line()}  [{r15.seconds:.1f} s]")
    report["verdict"] = _overall(report["criteria"])
    return report


def human_table(report: dict) -> str:
    lines = [f"{'id':>3}  {'criterion':<38} verdict"]
    for c in report["criteria"]:
        lines.append(f"{c['id']:>3}  {c['name']:<38} {c['verdict']}")
    lines.append(f"overall: {report['verdict']}")
    return "\n".join(lines)


@contextlib.contextmanager
def delta_sign_mutation():
    """Temporarily flip the sign of one term inside every Delta_i (a deliberate bug)."""
    original = curves.pair_invariants

    def mutant(c1, c2):
        inv = original(c1, c2)
        x, xp = c1.x, c2.x
        r, rp = c1.scale, c2.scale
        dx1 = float(x[0] - xp[0])
        deltas = tuple(float(abs((x[i - 1] - xp[i - 1]) * (rp - r) ** (i - 1) + dx1**i))
                       for i in range(2, c1.dim + 1))
        return curves.PairInvariants(deltas, inv.dbar, deltas[0] / inv.dbar if inv.dbar > 0 else 0.0,
                                     inv.t_candidate)

    curves.pair_invariants = mutant
    try:
        yield
    finally:
        curves.pair_invariants = original


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m momentlab.acceptance", description="Run the acceptance suite.")
    ap.add_argument("--budget", choices=sorted(BUDGETS), default="full")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", help="comma list of criterion ids")
    ap.add_argument("--json", help="write the JSON report here")
    ap.add_argument("--no-determinism", action="store_true", help="skip the rerun behind criterion 15")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)
    only = [int(v) for v in args.only.split(",")] if args.only else None
    echo = None if args.quiet else print
    report = run_suite(args.budget, args.seed, args.workers, only, not args.no_determinism, echo)
    if args.json:
        Path(args.json).write_text(report_json(report))
    if not args.quiet:
        print(human_table(report))
    return 0 if report["verdict"] == "PASS" else 1


if __name__ == "__main__":
    sys.exit(main())
