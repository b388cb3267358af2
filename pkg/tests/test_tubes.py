from __future__ import annotations

import math

import pytest

from momentlab.curves import MomentCurve, arc_length, gamma_point, pair_invariants
from momentlab.errors import ConfigError, DegeneratePair, InvalidDelta
from momentlab.tubes import (
    BOX,
    TUBE,
    VolumeEstimate,
    analytic_intersection_bound,
    intersection_volume,
    perturbed_tangency_volume,
    tube_volume,
)


def weyl_volume(d, delta, scale=1.0):
    """Tube formula for an embedded arc in R^3: pi delta^2 L plus the two end caps."""
    assert d == 3
    return math.pi * delta**2 * arc_length(d, scale) + 4.0 / 3.0 * math.pi * delta**3


@pytest.mark.parametrize("delta", [1 / 8, 1 / 32])
def test_tube_volume_matches_tube_formula(delta):
    est = tube_volume(MomentCurve.unit(3), delta, 4 * 10**5, seed=1, method=TUBE)
    ref = weyl_volume(3, delta)
    assert abs(est.value - ref) <= 4 * est.stderr + 1e-3 * ref


def test_box_and_tube_estimators_agree():
    c = MomentCurve([0.1, -0.2, 0.05], 1.3)
    a = tube_volume(c, 1 / 16, 4 * 10**5, seed=2, method=BOX)
    b = tube_volume(c, 1 / 16, 4 * 10**5, seed=2, method=TUBE)
    assert abs(a.value - b.value) <= 4 * math.hypot(a.stderr, b.stderr)


def test_tube_volume_scales_with_the_curve():
    # dilating the curve by r scales the arc length by r
    a = tube_volume(MomentCurve.unit(3), 1 / 32, 2 * 10**5, seed=3, method=TUBE)
    b = tube_volume(MomentCurve([0, 0, 0], 2.0), 1 / 32, 2 * 10**5, seed=3, method=TUBE)
    ratio_ref = weyl_volume(3, 1 / 32, 2.0) / weyl_volume(3, 1 / 32)
    assert b.value / a.value == pytest.approx(ratio_ref, rel=0.02)


def test_results_do_not_depend_on_worker_count():
    c = MomentCurve.unit(3)
    a = tube_volume(c, 1 / 16, 3 * 10**5, seed=5, method=TUBE, workers=1)
    b = tube_volume(c, 1 / 16, 3 * 10**5, seed=5, method=TUBE, workers=3)
    assert a == b


def test_same_seed_same_estimate_new_seed_new_estimate():
    c = MomentCurve.unit(3)
    a = tube_volume(c, 1 / 16, 10**5, seed=7)
    assert a == tube_volume(c, 1 / 16, 10**5, seed=7)
    assert a.value != tube_volume(c, 1 / 16, 10**5, seed=8).value


@pytest.mark.parametrize("delta", [0.0, -0.1, 0.25, 1.0])
def test_invalid_delta(delta):
    with pytest.raises(InvalidDelta):
        tube_volume(MomentCurve.unit(3), delta, 10**5)


def test_too_few_samples():
    with pytest.raises(ConfigError):
        tube_volume(MomentCurve.unit(3), 0.1, 100)


def test_intersection_with_itself_is_rejected():
    c = MomentCurve.unit(3)
    with pytest.raises(DegeneratePair):
        intersection_volume(c, c, 0.1, 10**5)


def test_far_apart_tubes_do_not_meet():
    est = intersection_volume(MomentCurve.unit(3), MomentCurve([5, 5, 5], 1.0), 0.1, 10**5)
    assert est.value == 0.0
    assert est.upper95 == 0.0 or est.hits == 0


def test_intersection_estimators_agree_both_orders():
    c1, c2 = MomentCurve.unit(3), MomentCurve([0, 0, 0], 1.5)
    a = intersection_volume(c1, c2, 1 / 16, 4 * 10**5, seed=1)
    b = intersection_volume(c2, c1, 1 / 16, 4 * 10**5, seed=1)
    box = intersection_volume(c1, c2, 1 / 16, 4 * 10**5, seed=1, method=BOX)
    assert abs(a.value - b.value) <= 4 * math.hypot(a.stderr, b.stderr)
    assert abs(a.value - box.value) <= 4 * math.hypot(a.stderr, box.stderr)


def test_intersection_below_tube_volume():
    c1, c2 = MomentCurve.unit(3), MomentCurve([0, 0, 0], 1.5)
    inter = intersection_volume(c1, c2, 1 / 16, 2 * 10**5, seed=4)
    tube = tube_volume(c1, 1 / 16, 2 * 10**5, seed=4, method=TUBE)
    assert inter.value < tube.value


def test_perturbation_limits():
    c1, c2 = MomentCurve.unit(3), MomentCurve([0, 0, 0], 1.5)
    delta = 1 / 16
    with pytest.raises(ConfigError):
        perturbed_tangency_volume(c1, c2, delta, [delta / 100, 0, 0], 10**5)
    with pytest.raises(ConfigError):
        perturbed_tangency_volume(c1, MomentCurve([0.3, 0, 0], 1.5), delta, [0, 0, 0], 10**5)
    est = perturbed_tangency_volume(c1, c2, delta, [delta / 4000, 0, 0], 2 * 10**5, seed=1)
    ref = intersection_volume(c1, c2, delta, 2 * 10**5, seed=1)
    assert abs(est.value - ref.value) <= 4 * math.hypot(est.stderr, ref.stderr)


def test_rule_of_three_when_nothing_hit():
    est = VolumeEstimate(0.0, 0.0, 10**4, BOX, 0, 2.0)
    assert est.upper95 == pytest.approx(3 * 2.0 / 10**4)


def test_bound_regimes():
    unit = MomentCurve.unit(3)
    inv = pair_invariants(unit, MomentCurve([0, 0, 0], 1.5))
    assert analytic_intersection_bound(inv, 1 / 16).regime == "tangent"
    # tangent pair: delta^3 / sqrt(delta (delta + 1/2))
    assert analytic_intersection_bound(inv, 1 / 16).bound_value == pytest.approx(
        (1 / 16) ** 3 / math.sqrt((1 / 16) * (1 / 16 + 0.5)))
    t1, t2, rp = 0.6, -0.5, 1.2
    far = MomentCurve(gamma_point(t1, 3) - rp * gamma_point(t2, 3), rp)
    inv = pair_invariants(unit, far)
    assert analytic_intersection_bound(inv, 1 / 64).regime == "transversal"
    near = MomentCurve([1e-3, 0, 0], 1.0)
    assert analytic_intersection_bound(pair_invariants(unit, near), 1 / 16).regime == "near-coincident"
