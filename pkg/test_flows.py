#!/usr/bin/env python3
"""
Tests for flow series, PDE residuals, orbit integration and projections
"""

import math
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest
import sympy

from exactalg import MPoly, VectorField, parse_poly
from flows import (
    RESIDUAL_FREE,
    DenominatorVanishingError,
    FlowSeries,
    NotQuadraticFieldError,
    StepSizeUnderflowError,
    TangencyViolationError,
    beltrami_probe,
    evaluate_series_on_ray,
    integrate_orbit,
    nonlinear_pde_residual,
    planar_projection,
    projected_circle,
    psi_field,
    psi_flow_series,
    pde_residual,
    ray_series,
    semigroup_check,
    stereographic_inverse,
    taylor_general,
    taylor_projective,
    trace_to_frame,
    trig_field_taylor,
    write_trace_csv,
)
from reynolds import dihedral_field

TETRA = VectorField.from_texts(["y*z", "x*z", "x*y"])
OCTA = VectorField(
    [parse_poly(t) for t in ("y*z*(y^2 - z^2)", "x*z*(z^2 - x^2)", "x*y*(x^2 - y^2)")],
    parse_poly("x^2 + y^2 + z^2"))
F = Fraction


# ----------------------------------------------------------------------
# projective series

def test_tetrahedral_series_on_ray():
    series = taylor_projective(TETRA, 9)
    coeffs = evaluate_series_on_ray(series, (3, 1, 2), 0)
    assert coeffs[:6] == [0, 3, 2, F(15, 2), F(41, 3), F(253, 8)]


def test_tetrahedral_series_second_ray():
    coeffs = ray_series(TETRA, (5, 4, 5), 4)[0]
    assert coeffs == [0, 5, 20, F(205, 2), 470]


def test_ray_series_matches_multivariate_series():
    series = taylor_projective(TETRA, 9)
    fast = ray_series(TETRA, (3, 1, 2), 9)
    for j in range(3):
        assert fast[j] == evaluate_series_on_ray(series, (3, 1, 2), j)


def test_rational_ray_series():
    coeffs = ray_series(OCTA, (3, 2, 1), 5)[0]
    assert coeffs == [0, 3, F(3, 7), F(-51, 98), F(-10, 7), F(-671, 2744)]


def test_rational_series_agrees_with_ray_series():
    series = taylor_projective(OCTA, 4)
    assert series.terms[0][1] == parse_poly("x")
    for j in range(3):
        assert evaluate_series_on_ray(series, (3, 2, 1), j) == ray_series(OCTA, (3, 2, 1), 4)[j]


def test_surd_ray_series():
    root2 = sympy.sqrt(2)
    coeffs = ray_series(OCTA, (root2, 1, 0), 9, exact_surds=True)[0]
    scaled = [sympy.nsimplify(sympy.simplify(c / root2)) for c in coeffs[1:]]
    expected = [1, 0, sympy.Rational(1, 18), 0, sympy.Rational(-13, 648)]
    assert scaled[:5] == expected


@pytest.mark.parametrize("big_n,big_m", [(2, 3), (3, 0)])
def test_psi_series_matches_binomials(big_n, big_m):
    recurrence = taylor_projective(psi_field(big_n, big_m), 6)
    closed = psi_flow_series(big_n, big_m, 6)
    for j in range(3):
        assert recurrence.terms[j] == closed.terms[j]


def test_projective_needs_quadratic_field():
    with pytest.raises(NotQuadraticFieldError):
        taylor_projective(VectorField.from_texts(["x^3", "y^3", "z^3"]), 3)
    with pytest.raises(NotQuadraticFieldError):
        ray_series(VectorField.from_texts(["x", "y", "z"]), (1, 1, 1), 3)


def test_series_json():
    payload = taylor_projective(TETRA, 3).to_json()
    assert '"kind": "projective"' in payload
    assert "y*z" in payload


# ----------------------------------------------------------------------
# general flows

def test_general_flow_logistic():
    series = taylor_general(VectorField.from_texts(["x^2 + x"], ["x"]), 3)
    assert series.terms[0][1] == parse_poly("x^2 + x", ["x"])
    assert series.terms[0][2] == parse_poly("1/2*(x^2 + x)*(2*x + 1)", ["x"])


def test_general_flow_of_negative_square():
    series = taylor_general(VectorField.from_texts(["-x^2"], ["x"]), 6)
    x = MPoly.variable(1, 0)
    for l in range(7):
        assert series.terms[0][l] == x ** (l + 1) * (-1) ** l


def test_dihedral_degree_growth():
    series = taylor_general(dihedral_field(2, "polynomial"), 3)
    for j in range(2):
        assert [series.terms[j][l].degree() for l in range(4)] == [1, 4, 7, 10]


# ----------------------------------------------------------------------
# PDE residuals

def test_residual_of_own_series():
    assert pde_residual(taylor_projective(TETRA, 6), TETRA) == 7
    assert pde_residual(taylor_projective(OCTA, 4), OCTA) == 5


def test_residual_of_identity_series():
    x, y, z = (MPoly.variable(3, i) for i in range(3))
    identity = FlowSeries("projective", [[MPoly.zero(3), x], [MPoly.zero(3), y], [MPoly.zero(3), z]], 1)
    assert pde_residual(identity, TETRA) == 2


def test_residual_flags_corrupted_term():
    series = taylor_projective(TETRA, 6)
    series.terms[0][3] = series.terms[0][3] + parse_poly("x^3")
    assert pde_residual(series, TETRA) == 3


def test_residual_free_constant():
    assert RESIDUAL_FREE == math.inf


def test_nonlinear_residual_true_series():
    psi = psi_flow_series(2, 2, 6)
    assert nonlinear_pde_residual(psi, psi, psi, 6)
    tetra = taylor_projective(TETRA, 7)
    assert nonlinear_pde_residual(tetra, tetra, tetra, 6)


def test_nonlinear_residual_detects_corruption():
    psi = psi_flow_series(2, 2, 6)
    psi.terms[0][3] = psi.terms[0][3] + parse_poly("5*x^3")
    assert not nonlinear_pde_residual(psi, psi, psi, 6)


def test_nonlinear_residual_rejects_rational_series():
    series = taylor_projective(OCTA, 3)
    with pytest.raises(TypeError):
        nonlinear_pde_residual(series, series, series, 3)


# ----------------------------------------------------------------------
# orbit integration

def test_octahedral_orbit_conserves_integrals():
    monitors = [parse_poly("x^2 + y^2 + z^2"), parse_poly("x^4 + y^4 + z^4")]
    trace = integrate_orbit(OCTA, (0.6, 0.8, 0.0), 10.0, rtol=1e-10, monitors=monitors)
    assert trace.times[-1] == 10.0
    assert all(d < 1e-9 for d in trace.integral_drift.values())
    assert trace.accepted > 0


def test_tetrahedral_orbit_conserves_integrals():
    monitors = [parse_poly("x^2 - y^2"), parse_poly("x^2 - z^2")]
    trace = integrate_orbit(TETRA, (3.0, 1.0, 2.0), 0.05, rtol=1e-10, monitors=monitors)
    assert all(d < 1e-8 for d in trace.integral_drift.values())


def test_orbit_matches_ray_series():
    x0 = (F(3, 5), F(4, 5), F(0))
    h = 0.05
    coeffs = ray_series(OCTA, x0, 10)
    expected = [sum(float(c) * h ** (k - 1) for k, c in enumerate(comp) if k) for comp in coeffs]
    final = integrate_orbit(OCTA, [float(v) for v in x0], h, rtol=1e-12).final_state
    assert np.allclose(final, expected, atol=1e-10)


def test_zero_duration_and_zero_start():
    trace = integrate_orbit(TETRA, (1.0, 2.0, 3.0), 0.0)
    assert len(trace.times) == 1
    resting = integrate_orbit(TETRA, (0.0, 0.0, 0.0), 1.0)
    assert np.all(resting.final_state == 0)


def test_orbit_argument_checks():
    with pytest.raises(ValueError):
        integrate_orbit(TETRA, (1.0, 1.0, 1.0), 1.0, rtol=1e-2)
    with pytest.raises(ValueError):
        integrate_orbit(TETRA, (1.0, 1.0, 1.0), -1.0)


def test_denominator_vanishing():
    field = VectorField([parse_poly("-y^3"), MPoly.zero(3), MPoly.zero(3)], parse_poly("x"))
    with pytest.raises(DenominatorVanishingError) as info:
        integrate_orbit(field, (0.0, 1.0, 0.0), 1.0)
    assert info.value.location == [0.0, 1.0, 0.0]


def test_orbit_into_pole_stops():
    field = VectorField([parse_poly("-y^3"), MPoly.zero(3), MPoly.zero(3)], parse_poly("x"))
    with pytest.raises((DenominatorVanishingError, StepSizeUnderflowError)):
        integrate_orbit(field, (1.0, 1.0, 0.0), 1.0)


def test_semigroup_property():
    assert semigroup_check(OCTA, (0.6, 0.8, 0.0), 0.3, 0.3) < 1e-8
    assert semigroup_check(TETRA, (0.3, 0.1, 0.2), 0.2, 0.5) < 1e-8


def test_reverse_orbit_returns():
    forward = integrate_orbit(OCTA, (0.6, 0.8, 0.0), 1.0, rtol=1e-12).final_state
    back = integrate_orbit(OCTA, forward, 1.0, rtol=1e-12, reverse=True).final_state
    assert np.allclose(back, [0.6, 0.8, 0.0], atol=1e-9)


def test_trace_csv(tmp_path):
    trace = integrate_orbit(TETRA, (0.3, 0.1, 0.2), 0.5, monitors=[parse_poly("x^2 - y^2")])
    frame = trace_to_frame(trace)
    assert list(frame.columns) == ["t", "x1", "x2", "x3", "drift[x^2 - y^2]"]
    path = write_trace_csv(trace, str(tmp_path / "orbit.csv"))
    loaded = pd.read_csv(path)
    assert len(loaded) == len(trace.times)
    assert loaded["t"].iloc[-1] == pytest.approx(0.5)


# ----------------------------------------------------------------------
# projections

def test_projected_circle():
    centre, radius = projected_circle((1, 1, 1))
    assert centre == (-2.0, -2.0)
    assert radius == pytest.approx(math.sqrt(12))
    assert projected_circle((1, -1, 1))[0] == (-2.0, 2.0)
    with pytest.raises(ValueError):
        projected_circle((1, 1, 0))


def test_great_circle_lands_on_projected_circle():
    alpha, beta = math.sqrt(2), -math.sqrt(2)
    point = stereographic_inverse(alpha, beta)
    assert float(np.sum(point)) == pytest.approx(0.0, abs=1e-12)
    assert (alpha + 2) ** 2 + (beta + 2) ** 2 == pytest.approx(12.0)


def test_stereographic_projection_of_sphere_tangent_field():
    planar = planar_projection(OCTA, "stereographic", (-3, 3, -3, 3, 7))
    frame = planar.samples
    assert list(frame.columns) == ["alpha", "beta", "Pi", "Theta", "true_Pi", "true_Theta"]
    origin = frame[(frame.alpha == 0) & (frame.beta == 0)]
    assert float(origin.Pi.iloc[0]) == pytest.approx(0.0, abs=1e-15)
    ratio = frame.true_Pi / frame.Pi.where(frame.Pi != 0)
    expected = (frame.alpha ** 2 + frame.beta ** 2 + 4) / 8
    assert np.allclose(ratio.dropna(), expected[ratio.notna()])


def test_stereographic_rejects_non_tangent_field():
    with pytest.raises(TangencyViolationError):
        planar_projection(TETRA, "stereographic", (-1, 1, -1, 1, 5))


def test_orthogonal_projection_closed_form():
    planar = planar_projection(TETRA, "orthogonal", (-2, 2, -1, 1, 5))
    a, b = sympy.symbols("alpha beta", real=True)
    pi_hat, theta_hat = planar.closed_form
    assert sympy.simplify(pi_hat - a * b) == 0
    assert sympy.simplify(theta_hat - (a ** 2 - 1 / (16 * a ** 2))) == 0
    assert planar.closed_form_error < 1e-12
    assert (planar.samples.alpha != 0).all()


def test_unknown_projection_mode():
    with pytest.raises(ValueError):
        planar_projection(OCTA, "gnomonic", (-1, 1, -1, 1, 3))


# ----------------------------------------------------------------------
# trigonometric fields

@pytest.mark.parametrize("name", ["T_tetra", "O_octa"])
def test_three_dimensional_trig_fields(name):
    report = beltrami_probe(name, points=200)
    assert report["max_curl_minus_field"] < 1e-12
    assert report["max_div"] < 1e-12
    assert report["max_helmholtz"] < 1e-12


def test_dihedral_trig_field():
    report = beltrami_probe("D_dihedral", points=200)
    assert report["max_curl_minus_field"] is None
    assert report["max_div"] < 1e-12
    assert report["max_helmholtz"] < 1e-12


def test_trig_field_taylor_anchor():
    assert trig_field_taylor("T_tetra", 2) == [parse_poly("2*y*z"), parse_poly("2*x*z"), parse_poly("2*x*y")]
    assert all(p.is_zero for p in trig_field_taylor("T_tetra", 1))


def test_unknown_trig_field():
    with pytest.raises(ValueError):
        trig_field_taylor("icosa", 2)
