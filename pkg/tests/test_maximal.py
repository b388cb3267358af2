from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from momentlab.curves import MomentCurve, arc_length
from momentlab.errors import ConfigError, InvalidExponent, ResolutionError
from momentlab.fields import Grid, ScalarField, constant_field, tube_indicator_field
from momentlab.maximal import (
    MaximalConfig,
    MaximalSurface,
    ParamSample,
    maximal_lp_norm,
    maximal_value,
    smooth_average,
    tube_average,
    tube_quadrature,
)
from momentlab.multiplier import build_cutoffs, chi0, chi1


def _box_field(value=1.0, spacing=1 / 32):
    g = Grid.from_box([-2, -1, -2], [2, 3, 3], spacing=spacing)
    return constant_field(g, value)


@given(st.floats(0.6, 1.8), st.floats(0.02, 0.2))
def test_constant_field_average_is_one(r, delta):
    f = _box_field(spacing=0.01)
    c = MomentCurve([0.0, 0.2, 0.1], r)
    assert tube_average(f, c, delta, n=256) == pytest.approx(1.0, abs=1e-12)


def test_quadrature_measure_matches_tube_volume():
    for r, delta in [(1.0, 0.05), (1.5, 0.02)]:
        q = tube_quadrature(3, r, delta, 4096)
        weyl = math.pi * delta**2 * arc_length(3, r) + 4.0 / 3.0 * math.pi * delta**3
        assert q.measure == pytest.approx(weyl, rel=0.03)


def test_own_indicator_nearly_one():
    delta = 1 / 16
    c = MomentCurve([0.0, 0.1, -0.1], 1.2)
    f = tube_indicator_field(c, delta, spacing=delta / 8)
    assert tube_average(f, c, delta) >= 0.95


def test_average_is_monotone():
    rng = np.random.default_rng(5)
    g = Grid.from_box([-2, -1, -2], [2, 3, 3], spacing=1 / 16)
    a = rng.random(g.shape)
    b = a + rng.random(g.shape)
    c = MomentCurve([0.1, 0.0, 0.2], 1.1)
    ta = tube_average(ScalarField(g, a), c, 1 / 8)
    tb = tube_average(ScalarField(g, b), c, 1 / 8)
    assert ta <= tb


def test_average_rejects_coarse_field():
    f = _box_field(spacing=0.1)
    with pytest.raises(ResolutionError):
        tube_average(f, MomentCurve.unit(3), 0.1)


def test_maximal_value_finds_planted_tube():
    delta = 1 / 8
    c = MomentCurve([0.25, -0.125, 0.0], 1.0)
    f = tube_indicator_field(c, delta, box=([-2, -1.5, -1.5], [2.5, 1.5, 1.5]), spacing=delta / 4)
    cfg = MaximalConfig(d=3, s=2, delta=delta, tail_range=(0.0, 0.0), r_range=(1.0, 1.0))
    m = maximal_value(f, ParamSample((0.0,), 1.0), cfg)
    assert m >= tube_average(f, c, delta) - 1e-12
    assert m >= 0.9


def test_maximal_value_of_constant():
    f = _box_field(3.0, spacing=1 / 16)
    cfg = MaximalConfig(d=3, s=2, delta=1 / 8, search_lo=(-0.25, -0.25), search_hi=(0.25, 0.25))
    assert maximal_value(f, ParamSample((0.0,), 1.0), cfg) == pytest.approx(3.0)


def test_config_validation():
    with pytest.raises(ConfigError):
        MaximalConfig(d=3, s=4)
    with pytest.raises(ConfigError):
        MaximalConfig(delta=1 / 8, search_step=0.2)


def test_cell_weights_sum_to_box_volume():
    cfg = MaximalConfig(d=3, s=2, delta=1 / 8)
    shape = tuple(a.size for a in cfg.param_axes())
    surf = MaximalSurface(np.full(shape, 2.0), cfg)
    vol = (0.25 - -0.25) * (2.0 - 0.5)
    assert surf.cell_weights().sum() == pytest.approx(vol)
    assert maximal_lp_norm(surf, 2) == pytest.approx(2.0 * math.sqrt(vol))
    assert maximal_lp_norm(surf, math.inf) == 2.0
    with pytest.raises(InvalidExponent):
        maximal_lp_norm(surf, 0.9)


def test_smooth_average_of_constant_matches_quadrature_oracle():
    """f = 1 gives chi1(r) times the integrals of chi0 and psi; the oracle
    integrates the cutoffs directly with adaptive quadrature."""
    d, delta, r = 2, 1 / 16, 1.0
    cut = build_cutoffs(d)
    w = cut._y[-1] / cut.lam * delta
    g = Grid.from_box([-2.2, -w - 0.1], [2.2, 4 + w + 0.1], spacing=delta / 2)
    got = smooth_average(constant_field(g, 1.0), [0.0, 0.0], r, delta, cut)
    chi0_l1 = quad(lambda u: float(chi0(u)), -2, 2, points=[-1.5, 1.5], epsabs=1e-13)[0]
    half = cut._y[-1] / cut.lam
    psi_l1 = quad(lambda t: float(cut.psi1(t)), -half, half, limit=400, epsabs=1e-12)[0]
    assert got == pytest.approx(float(chi1(r)) * chi0_l1 * psi_l1, rel=1e-6)


def test_smooth_average_dominates_tube_average():
    """The smoothed operator controls the sharp tube average up to a constant."""
    d, delta = 3, 1 / 16
    cut = build_cutoffs(d)
    c = MomentCurve([0.0, 0.2, -0.1], 1.3)
    f = tube_indicator_field(c, delta, box=([-1.5, -0.5, -2.5], [1.5, 2.5, 2.5]), spacing=delta / 2)
    ta = tube_average(f, c, delta)
    sa = smooth_average(f, c.x, c.scale, delta, cut)
    assert ta > 0 and sa > 0
    # the analytic ratio bound r delta^(d-1) / (chi1(r) |H_delta|) is below 0.1
    assert ta / sa <= 0.1
