from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from momentlab.curves import (
    MomentCurve,
    curve_distances,
    curve_intersections,
    curve_point,
    distance_to_curve,
    gamma_derivative,
    gamma_point,
    is_tangent,
    pair_invariants,
    parse_curve,
    planar_intersections,
    project_to_parabola,
    solve_tangent_curve,
    vertical_constant,
    within_tube,
)
from momentlab.errors import (
    DegeneratePair,
    InvalidDimension,
    InvalidInput,
    NoAdmissibleTangent,
    OutOfRange,
)
from momentlab.oracles import dense_distance, grid_intersections, tangency_grid_oracle

coord = st.floats(-1.0, 1.0, allow_nan=False)
scale = st.floats(0.5, 2.0, allow_nan=False)


@st.composite
def curves3(draw):
    return MomentCurve([draw(coord) for _ in range(3)], draw(scale))


def test_gamma_point_and_derivatives():
    assert np.allclose(gamma_point(2.0, 4), [2, 4, 8, 16])
    assert np.allclose(gamma_derivative(2.0, 3), [1, 4, 12])
    assert np.allclose(gamma_derivative(2.0, 3, 2), [0, 2, 12])
    assert np.allclose(gamma_derivative(2.0, 3, 3), [0, 0, 6])


def test_dimension_must_be_at_least_two():
    with pytest.raises(InvalidDimension):
        MomentCurve([0.0], 1.0)


def test_scale_must_be_positive():
    with pytest.raises(InvalidInput):
        MomentCurve([0, 0, 0], 0.0)


def test_curve_point_range():
    c = MomentCurve.unit(3)
    assert np.allclose(curve_point(c, 0.5), [0.5, 0.25, 0.125])
    assert np.allclose(curve_point(c, 1.4, extended=True), gamma_point(1.4, 3))
    with pytest.raises(OutOfRange):
        curve_point(c, 1.2)


def test_vertical_constant_closed_form():
    # d = 3, u = 1.5: sqrt(1 + (2*1.5)^2 + (3*1.5^2)^2)
    assert vertical_constant(3, 1.5) == pytest.approx(math.sqrt(1 + 9 + 6.75**2))


def test_distance_example_far_point():
    # minimizer of |(2,0,0) - gamma(t)|^2 on [-1, 1], confirmed by the dense oracle
    t, dist = distance_to_curve([2.0, 0.0, 0.0], MomentCurve.unit(3))
    t_ref, d_ref = dense_distance([2.0, 0.0, 0.0], MomentCurve.unit(3))
    assert t == pytest.approx(0.71417, abs=1e-5)
    assert dist == pytest.approx(1.43045, abs=1e-5)
    assert dist == pytest.approx(d_ref, abs=1e-9)
    assert t == pytest.approx(t_ref, abs=1e-5)


def test_distance_on_curve_is_zero():
    c = MomentCurve([0.1, -0.2, 0.3], 1.5)
    t, dist = distance_to_curve(c.points(-0.3), c)
    assert dist == pytest.approx(0.0, abs=1e-9)
    assert t == pytest.approx(-0.3, abs=1e-6)


@given(curves3(), st.lists(st.floats(-3, 3, allow_nan=False), min_size=3, max_size=3))
def test_distance_matches_dense_scan(c, p):
    _, fast = distance_to_curve(p, c)
    _, slow = dense_distance(p, c, n=200_001)
    # the scan can only overestimate, by at most the grid gap times the speed
    assert fast <= slow + 1e-12
    assert slow - fast <= 1e-4


@given(curves3(), st.integers(0, 10_000))
def test_vectorized_distance_matches_scalar(c, seed):
    rng = np.random.default_rng(seed)
    P = rng.uniform(-2, 2, (20, 3))
    _, D = curve_distances(P, c)
    for p, dv in zip(P, D):
        assert dv == pytest.approx(distance_to_curve(p, c)[1], abs=1e-9)


@given(curves3(), st.integers(0, 10_000), st.floats(0.01, 0.3))
def test_within_tube_matches_distance(c, seed, radius):
    rng = np.random.default_rng(seed)
    t = rng.uniform(-1, 1, 200)
    P = c.points(t) + rng.normal(scale=radius, size=(200, 3))
    mask = within_tube(P, c, radius)
    for p, m in zip(P, mask):
        dist = distance_to_curve(p, c)[1]
        if abs(dist - radius) > 1e-9:
            assert m == (dist <= radius)


def test_pair_invariants_unit_vs_dilate():
    inv = pair_invariants(MomentCurve.unit(3), MomentCurve([0, 0, 0], 1.5))
    assert inv.deltas == (0.0, 0.0)
    assert inv.dbar == pytest.approx(0.5)
    assert inv.t_candidate == pytest.approx(0.0)


@given(curves3(), curves3())
def test_pair_invariants_symmetric(c1, c2):
    a, b = pair_invariants(c1, c2), pair_invariants(c2, c1)
    assert np.allclose(a.deltas, b.deltas, rtol=1e-12, atol=1e-14)
    assert a.dbar == pytest.approx(b.dbar)


@given(curves3(), curves3(), st.lists(coord, min_size=3, max_size=3))
def test_pair_invariants_translation_invariant(c1, c2, v):
    a = pair_invariants(c1, c2)
    b = pair_invariants(c1.translated(v), c2.translated(v))
    assert np.allclose(a.deltas, b.deltas, rtol=1e-9, atol=1e-12)


def test_solve_tangent_curve_example():
    c = solve_tangent_curve(0.015625, 0.875, 3)
    assert np.allclose(c.center, [1 / 16, 1 / 32, 1 / 64])
    t, p = is_tangent(c, MomentCurve.unit(3))
    assert t == pytest.approx(0.5)
    assert np.allclose(p, gamma_point(0.5, 3))


@given(st.floats(-0.95, 0.95), st.floats(0.5, 2.0).filter(lambda r: abs(r - 1) > 0.02), st.sampled_from([3, 4, 5]))
def test_constructed_tangent_curves_are_tangent(t, r, d):
    c = solve_tangent_curve((1 - r) * t**d, r, d)
    inv = pair_invariants(c, MomentCurve.unit(d))
    assert max(inv.deltas) <= 1e-10
    hit = is_tangent(c, MomentCurve.unit(d))
    # in even dimension only t^d is prescribed and the positive root is taken
    expected = abs(t) if d % 2 == 0 else t
    assert hit is not None and hit[0] == pytest.approx(expected, abs=1e-9)


def test_tangent_curve_even_dimension_negative_root():
    with pytest.raises(NoAdmissibleTangent):
        solve_tangent_curve(0.1, 2.0, 4)


def test_tangent_curve_out_of_range():
    with pytest.raises(NoAdmissibleTangent):
        solve_tangent_curve(5.0, 0.875, 3)


def test_identical_curves_are_degenerate():
    c = MomentCurve([0.1, 0.2, 0.3], 1.2)
    with pytest.raises(DegeneratePair):
        is_tangent(c, c)
    with pytest.raises(DegeneratePair):
        curve_intersections(c, c)


def test_tangency_agrees_with_grid_oracle_on_examples():
    unit = MomentCurve.unit(3)
    c = solve_tangent_curve(0.015625, 0.875, 3)
    assert tangency_grid_oracle(c, unit) is not None
    other = MomentCurve([0.3, -0.2, 0.1], 1.3)
    assert is_tangent(other, unit, tol=1e-6) is None
    assert tangency_grid_oracle(other, unit) is None


def test_planar_roots_example():
    roots = planar_intersections(project_to_parabola(MomentCurve.unit(3)),
                                 project_to_parabola(parse_curve("0,0.1,0@2", 3)))
    assert roots == pytest.approx([-1 / math.sqrt(5), 1 / math.sqrt(5)])


@given(curves3(), curves3())
def test_planar_roots_lie_on_both_arcs(c1, c2):
    p1, p2 = project_to_parabola(c1), project_to_parabola(c2)
    roots = planar_intersections(p1, p2)
    assert len(roots) <= 2
    for t in roots:
        X, Y = c1.center[0] + c1.scale * t, c1.center[1] + c1.scale * t * t
        tp = (X - c2.center[0]) / c2.scale
        assert abs(tp) <= 1 + 1e-9
        assert Y == pytest.approx(c2.center[1] + c2.scale * tp * tp, abs=1e-8)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.5, 2.0))
def test_constructed_intersection_is_found(t1, t2, rp):
    assume(abs(rp - 1) > 1e-3 or abs(t1 - t2) > 1e-3)
    x = gamma_point(t1, 3) - rp * gamma_point(t2, 3)
    c2 = MomentCurve(x, rp)
    rep = curve_intersections(MomentCurve.unit(3), c2)
    assert 1 <= rep.count <= 2
    assert min(abs(t - t1) for t, _, _ in rep.points) <= 1e-7
    for t, tp, p in rep.points:
        assert np.allclose(p, c2.points(tp), atol=1e-8)


def test_grid_scan_agrees_on_a_crossing():
    t1, t2, rp = 0.3, -0.4, 1.3
    c2 = MomentCurve(gamma_point(t1, 3) - rp * gamma_point(t2, 3), rp)
    hits = grid_intersections(MomentCurve.unit(3), c2)
    assert len(hits) >= 1
    assert min(abs(h - t1) for h in hits) <= 1e-3


def test_parse_curve():
    c = parse_curve("0.1,0.2,0.3@1.5")
    assert c.center == (0.1, 0.2, 0.3) and c.scale == 1.5
    assert parse_curve("@2", 3).center == (0.0, 0.0, 0.0)
    with pytest.raises(InvalidInput):
        parse_curve("a,b@1")
    with pytest.raises(InvalidInput):
        parse_curve("0,0@1", 3)
