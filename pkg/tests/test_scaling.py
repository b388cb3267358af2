from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momentlab.errors import ConfigError, EmptySet, FitDomainError, InvalidInput
from momentlab.fields import Grid, ScalarField, constant_field
from momentlab.scaling import (
    LadderResult,
    box_count_dimension,
    box_counts,
    fit_exponent,
    loglog_fit,
    parse_scale_list,
    predicted_exponents,
)

finite = st.floats(-5, 5, allow_nan=False)


@given(finite, st.floats(-3, 3))
def test_loglog_fit_recovers_power_law(a, c):
    x = 2.0 ** -np.arange(2, 9)
    fit = loglog_fit(x, math.exp(c) * x**a)
    assert fit.slope == pytest.approx(a, abs=1e-9)
    assert fit.intercept == pytest.approx(c, abs=1e-8)
    assert fit.r_squared == pytest.approx(1.0) or a == pytest.approx(0.0, abs=1e-9)


def test_loglog_fit_matches_polyfit_oracle():
    rng = np.random.default_rng(2)
    x = 2.0 ** -np.arange(2, 10)
    y = x**2.3 * np.exp(rng.normal(0, 0.05, x.size))
    fit = loglog_fit(x, y)
    slope, icpt = np.polyfit(np.log(x), np.log(y), 1)
    assert fit.slope == pytest.approx(slope, rel=1e-12)
    assert fit.intercept == pytest.approx(icpt, rel=1e-12)


def test_weighted_fit_ignores_heavily_uncertain_point():
    x = 2.0 ** -np.arange(2, 8)
    y = x**2.0
    y[0] *= 3.0
    sigma = np.full(x.size, 1e-3)
    sigma[0] = 1e3
    assert loglog_fit(x, y, sigma).slope == pytest.approx(2.0, abs=1e-4)


def test_fit_domain_errors():
    with pytest.raises(FitDomainError):
        loglog_fit([1.0, 0.5], [1.0, 0.0])
    lad = LadderResult(((0.5, 1.0, 0.1), (0.25, 0.5, 0.1), (0.125, 0.25, 0.1)), "x")
    with pytest.raises(FitDomainError):
        fit_exponent(lad)


def test_ladder_must_decrease():
    with pytest.raises(InvalidInput):
        LadderResult(((0.25, 1.0, 0.0), (0.5, 1.0, 0.0)), "x")


@given(st.lists(st.tuples(st.floats(1e-6, 10), st.floats(0, 1e6), st.floats(0, 1e3)),
                min_size=1, max_size=8, unique_by=lambda r: r[0]))
def test_ladder_csv_roundtrip(rows):
    rows = sorted(rows, key=lambda r: -r[0])
    lad = LadderResult(tuple(rows), "exp", 3)
    back = LadderResult.from_csv(lad.to_csv(), "exp", 3)
    assert back == lad


def test_parse_scale_list():
    assert parse_scale_list("2^-3..2^-5") == [0.125, 0.0625, 0.03125]
    assert parse_scale_list("2^-4, 0.5,1e-2") == [0.0625, 0.5, 0.01]
    assert parse_scale_list("2^2..2^4") == [4.0, 8.0, 16.0]
    with pytest.raises(ConfigError):
        parse_scale_list("0.1..0.2")
    with pytest.raises(ConfigError):
        parse_scale_list("abc")
    with pytest.raises(ConfigError):
        parse_scale_list(",")


def test_box_counts_of_cube_match_formula():
    g = Grid.from_box([0, 0, 0], [1, 1, 1], spacing=1 / 64)
    f = constant_field(g, 1.0)
    assert box_counts(f, [0.25, 0.125]) == [64, 512]
    res = box_count_dimension(f, [0.25, 0.125, 1 / 16, 1 / 32])
    assert res.fitted_dimension == pytest.approx(3.0, abs=1e-9)


def test_box_counts_of_plane():
    g = Grid.from_box([0, 0, 0], [1, 1, 1], spacing=1 / 64)
    v = np.zeros(g.shape, dtype=np.uint8)
    v[:, :, 20] = 1
    res = box_count_dimension(ScalarField(g, v), [0.25, 0.125, 1 / 16, 1 / 32])
    assert res.fitted_dimension == pytest.approx(2.0, abs=1e-9)


def test_box_count_window_and_empty():
    g = Grid.from_box([0, 0, 0], [1, 1, 1], spacing=1 / 64)
    with pytest.raises(ConfigError):
        box_count_dimension(constant_field(g), [0.5, 0.25, 0.125, 1 / 16])
    with pytest.raises(EmptySet):
        box_counts(ScalarField(g, np.zeros(g.shape)), [0.25])


def test_predicted_exponents_table():
    t = predicted_exponents(2, 3, 3.0)
    assert t["s_prime"] == 2 and t["tube_volume"] == 2
    assert t["tangent_intersection"] == 2.5 and t["transversal_intersection"] == 3.0
    assert t["field_mass"] == 0.0 and t["dimension"] == 3.0
    t = predicted_exponents(3, 3, 4.0)
    assert t["alpha"] == pytest.approx(0.25) and t["p_d"] == 3.0
    assert predicted_exponents(1, 3, 2.0)["absolute_constant"]
    with pytest.raises(ConfigError):
        predicted_exponents(4, 3, 2.0)
