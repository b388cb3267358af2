from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from momentlab.curves import vertical_constant
from momentlab.errors import ConfigError
from momentlab.multiplier import (
    a1,
    bernstein_check,
    bernstein_ratio,
    build_cutoffs,
    chi0,
    chi1,
    cone_decay_profile,
    decomposition_weights_rows,
    default_kappa,
    dirichlet_field,
    fd_weights,
    oscillatory_integral,
    parallelepiped_volumes,
    phase_derivative_check,
    plateau,
    psi_spectrum_leak,
    smooth_step,
    verify_symbol_conditions,
)


@given(st.floats(-3, 3))
def test_smooth_step_symmetry(x):
    assert smooth_step(x) + smooth_step(1 - x) == pytest.approx(1.0, abs=1e-15)
    assert 0.0 <= smooth_step(x) <= 1.0


def test_cutoff_plateaus_and_supports():
    assert chi0(1.5) == 1.0 and chi0(2.0) == 0.0 and chi0(-2.5) == 0.0
    assert chi1(0.5) == 1.0 and chi1(2.0) == 1.0 and chi1(0.25) == 0.0 and chi1(3.0) == 0.0
    assert a1(1.0) == 1.0 and a1(2.0) == 0.0
    x = np.linspace(-3, 3, 601)
    assert np.all(np.diff(plateau(x[x >= 0], 1.0, 2.0)) <= 0)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_psi1_covers_vertical_shadow(d):
    cut = build_cutoffs(d)
    c = vertical_constant(d, 1.5)
    x = np.linspace(-c, c, 2001)
    assert np.all(cut.psi1(x) >= 1.0 - 1e-12)
    assert np.all(cut.psi1(np.linspace(-100, 100, 4001)) >= 0)


@pytest.mark.parametrize("d", [2, 3])
def test_psi_transform_supported_in_ball(d):
    cut = build_cutoffs(d)
    peak, leak = psi_spectrum_leak(cut)
    assert leak <= 1e-6 * peak
    assert cut.psi1_hat(cut.lam * 1.0001) == 0.0


def test_psi_transform_matches_l1_norm_at_zero():
    cut = build_cutoffs(3)
    assert float(cut.psi1_hat(0.0)) == pytest.approx(cut.psi1_l1, rel=1e-6)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_partition_of_unity(d):
    cut = build_cutoffs(d)
    rng = np.random.default_rng(d)
    xi = rng.standard_normal((20000, d)) * np.exp(rng.uniform(-3, 6, (20000, 1)))
    w = decomposition_weights_rows(xi, cut)
    assert np.all(w >= 0)
    assert np.max(np.abs(w.sum(axis=1) - 1.0)) <= 1e-14
    n = np.linalg.norm(xi[:, 1:], axis=1)
    ks = range(0, 40)
    lp = sum(cut.annulus(xi[:, 1:], k) for k in ks)
    assert np.max(np.abs(lp[n < 2.0**38] - 1.0)) <= 1e-14


def test_default_kappa():
    assert default_kappa(3) == pytest.approx(27.0)
    for d in range(2, 9):
        assert phase_derivative_check(build_cutoffs(d), n=20000, seed=d) == 0


@pytest.mark.parametrize("xi,r", [((3.0, 1.0, 0.5), 1.0), ((0.0, 4.0, -2.0), 1.3), ((10.0, 0.2, 0.1), 0.8)])
def test_oscillatory_integral_matches_adaptive_quadrature(xi, r):
    cut = build_cutoffs(3)
    xi_a = np.asarray(xi)

    def phase(u):
        return -2 * math.pi * r * (xi_a[0] * u + xi_a[1] * u**2 + xi_a[2] * u**3)

    re = quad(lambda u: float(chi0(u)) * math.cos(phase(u)), -2, 2, limit=500, epsabs=1e-13)[0]
    im = quad(lambda u: float(chi0(u)) * math.sin(phase(u)), -2, 2, limit=500, epsabs=1e-13)[0]
    got = oscillatory_integral(xi, r, cut)
    assert abs(got - complex(re, im)) <= 1e-9


def test_oscillatory_integral_at_zero_is_chi0_mass():
    cut = build_cutoffs(3)
    assert oscillatory_integral((0.0, 0.0, 0.0), 1.0, cut).real == pytest.approx(cut.chi0_l1, rel=1e-12)


def test_extended_precision_agrees_with_double():
    cut = build_cutoffs(3)
    xi = (20.0, 0.5, 0.1)
    a = oscillatory_integral(xi, 1.1, cut)
    b = oscillatory_integral(xi, 1.1, cut, extended=True)
    assert abs(a - b) <= 1e-11


def test_oscillatory_integral_rejects_r_outside_support():
    with pytest.raises(ConfigError):
        oscillatory_integral((1.0, 0.0, 0.0), 3.5, build_cutoffs(3))


def test_cone_contrast_small_ladder():
    cut = build_cutoffs(3)
    lad0 = cone_decay_profile((1, 0.01, 0.005), 1.1, [16, 32, 64], cut)
    lad1 = cone_decay_profile((0, 0, 1), 1.1, [16, 32, 64], cut)
    o0, o1 = np.argsort(lad0.scales), np.argsort(lad1.scales)
    v0, v1 = lad0.values[o0], lad1.values[o1]
    assert v0[-1] < 1e-4 * v1[-1]
    assert np.all(np.diff(v0) < 0)


@given(st.integers(1, 6), st.integers(1, 4))
def test_fd_weights_differentiate_polynomials(order, extra):
    half = (order + 1) // 2 + extra
    w = fd_weights(order, half)
    j = np.arange(-half, half + 1, dtype=float)
    for p in range(0, 2 * half + 1):
        expect = math.factorial(order) if p == order else 0.0
        assert np.dot(w, j**p) == pytest.approx(expect, abs=1e-6 * max(1.0, half ** p))


@pytest.mark.parametrize("d", [2, 3, 5])
def test_parallelepiped_volume_constant(d):
    vols = parallelepiped_volumes(d, np.linspace(-2, 2, 41))
    target = float(np.prod([math.factorial(i) for i in range(1, d + 1)]))
    assert np.allclose(vols, target, rtol=1e-12)


def test_symbol_conditions_pass_with_large_B_and_fail_with_small():
    rep = verify_symbol_conditions(3, 1e30, 4, samples=40)
    assert rep.passes and rep.B_required > rep.aa_max
    assert not verify_symbol_conditions(3, 10.0, 4, samples=40).passes


@pytest.mark.parametrize("R", [4, 8, 16])
def test_dirichlet_ratio_closed_form(R):
    """For the 1-d Dirichlet kernel sup = 2R+1 and the L^2 norm is sqrt(2R+1)."""
    F = dirichlet_field(1, R)
    assert bernstein_ratio(F, R, 2) == pytest.approx(math.sqrt((2 * R + 1) / R), rel=1e-10)


def test_bernstein_check_bounded_across_R():
    vals = [bernstein_check(2, R, 4, trials=10, seed=1) for R in (8, 16)]
    assert max(vals) < 3.0
    assert abs(math.log(vals[1] / vals[0])) < 0.2
