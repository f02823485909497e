#!/usr/bin/env python3
"""
Tests for sphere moments, spherical constants, zero counting, the image
surface identity and the extremal circle ratios
"""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from exactalg import MPoly, VectorField, parse_poly
from spherical import (
    SURFACE_FIXTURE,
    ZeroFieldError,
    _log_integrand,
    circle_beta2,
    circle_beta_inf,
    circle_ratio,
    extremal_ratio_2_4,
    fibonacci_sphere,
    octa_sphere_field,
    octahedral_degree6_field,
    rotate_field,
    sphere_average,
    sphere_monomial_average,
    sphere_vanish_count,
    sphere_zeros,
    spherical_constants,
    squared_norm,
    surface_identity_check,
    surface_polynomial,
)

F = Fraction
SQRT73 = math.sqrt(73)
ALPHA_INF = math.sqrt(827 + 73 * SQRT73) / (96 * math.sqrt(2))
OMEGA_INF = (28945 + 2555 * SQRT73) / 24576
XI_2_4 = 2 - 2 * math.sqrt(6) / 9

# rotation by pi/3 about (1, 1, 1), not an octahedral symmetry
ROTATION = [[F(2, 3), F(-1, 3), F(2, 3)],
            [F(2, 3), F(2, 3), F(-1, 3)],
            [F(-1, 3), F(2, 3), F(2, 3)]]


@pytest.fixture(scope="module")
def octa_constants():
    return spherical_constants(octa_sphere_field())


# ----------------------------------------------------------------------
# monomial averages

@pytest.mark.parametrize("exps, expected", [
    ((2, 0, 0), F(1, 3)),
    ((4, 0, 0), F(1, 5)),
    ((2, 2, 0), F(1, 15)),
    ((1, 1, 0), F(0)),
    ((0, 0, 0), F(1)),
    ((6, 0), F(5, 16)),
    ((2, 4), F(1, 16)),
])
def test_monomial_average(exps, expected):
    assert sphere_monomial_average(exps) == expected


def test_monomial_average_matches_sample_mean():
    rng = np.random.default_rng(7)
    pts = fibonacci_sphere(1_000_000)
    for _ in range(20):
        exps = tuple(int(2 * k) for k in rng.integers(0, 3, size=3))
        sampled = float(np.mean(np.prod(pts ** np.array(exps), axis=-1)))
        assert sampled == pytest.approx(float(sphere_monomial_average(exps)), abs=1e-4)


def test_monomial_average_rejects_negative():
    with pytest.raises(ValueError):
        sphere_monomial_average((2, -1))


def test_sphere_average_scales_with_radius():
    p = parse_poly("x^2*y^2 + z^4")
    assert sphere_average(p, 2) == 16 * sphere_average(p)


# ----------------------------------------------------------------------
# spherical constants

def test_alpha2_exact(octa_constants):
    assert octa_constants.alpha2 == F(4, 105)
    assert octa_constants.methods["alpha2"] == "exact"


def test_alpha_inf_closed_form(octa_constants):
    assert octa_constants.alpha_inf == pytest.approx(ALPHA_INF, abs=1e-9)
    assert octa_constants.OmegaInf == pytest.approx(OMEGA_INF, abs=1e-9)
    assert octa_constants.OmegaInf == pytest.approx(2.066037173, abs=1e-9)


def test_alpha_inf_beats_sampled_grid(octa_constants):
    norm2 = squared_norm(octa_sphere_field()).to_numeric()
    sampled = np.sqrt(np.max(norm2(fibonacci_sphere(20000))))
    assert octa_constants.alpha_inf >= sampled - 1e-15


def test_omega_chain(octa_constants):
    c = octa_constants
    assert 0 < c.Omega0 < c.Omega1 < 1 < c.OmegaInf
    assert c.alpha0 < c.alpha1 < math.sqrt(float(c.alpha2)) < c.alpha_inf


def test_constants_json(octa_constants):
    payload = json.loads(octa_constants.to_json())
    assert payload["schema"] == 1
    assert payload["alpha2"] == "4/105"
    assert payload["methods"]["alpha_inf"] == "optimization"


def test_alpha2_scaling_law():
    field_ = octa_sphere_field().scale(3)
    assert sphere_average(squared_norm(field_), 2) == 9 * 2 ** 8 * F(4, 105)


@pytest.mark.slow
def test_ratios_invariant_under_scaling(octa_constants):
    scaled = spherical_constants(octa_sphere_field().scale(5), radius=2.0)
    assert scaled.alpha2 == 25 * 256 * F(4, 105)
    assert scaled.OmegaInf == pytest.approx(octa_constants.OmegaInf, abs=1e-9)
    assert scaled.Omega1 == pytest.approx(octa_constants.Omega1, abs=1e-6)
    assert scaled.Omega0 == pytest.approx(octa_constants.Omega0, abs=1e-5)


@pytest.mark.slow
def test_constants_invariant_under_rotation(octa_constants):
    rotated = spherical_constants(rotate_field(octa_sphere_field(), ROTATION))
    assert rotated.alpha2 == octa_constants.alpha2
    assert rotated.alpha_inf == pytest.approx(octa_constants.alpha_inf, abs=1e-9)
    assert rotated.alpha1 == pytest.approx(octa_constants.alpha1, abs=1e-7)
    assert rotated.alpha0 == pytest.approx(octa_constants.alpha0, abs=1e-5)


def test_rotate_field_rejects_non_orthogonal():
    with pytest.raises(ValueError):
        rotate_field(octa_sphere_field(), [[1, 1, 0], [0, 1, 0], [0, 0, 1]])


def test_float_rotation_preserves_alpha2():
    c, s = math.cos(0.3), math.sin(0.3)
    rotated = rotate_field(octa_sphere_field(), [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    assert float(sphere_average(squared_norm(rotated))) == pytest.approx(4 / 105, abs=1e-12)


def test_float_rotation_rejects_non_orthogonal():
    with pytest.raises(ValueError):
        rotate_field(octa_sphere_field(), [[1.0, 1e-6, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


def test_zero_field_has_no_constants():
    with pytest.raises(ZeroFieldError):
        spherical_constants(VectorField.zero(3))


# ----------------------------------------------------------------------
# zeros on the sphere

def test_octahedral_field_vanishes_at_26_points():
    assert sphere_vanish_count(octa_sphere_field()) == 26


def test_cube_vertex_is_a_zero():
    zeros = sphere_zeros(octa_sphere_field())
    vertex = np.ones(3) / math.sqrt(3)
    assert np.min(np.linalg.norm(zeros - vertex, axis=-1)) < 1e-9


def test_log_integrand_is_finite_on_zeros():
    numeric = squared_norm(octa_sphere_field()).to_numeric()
    nodes = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.6, 0.8, 0.0]])
    assert numeric(nodes[:2]).tolist() == [0.0, 0.0]
    values = _log_integrand(numeric)(nodes)
    assert np.all(np.isfinite(values))
    assert values[0] == pytest.approx(0.5 * math.log(1e-300))


@pytest.mark.parametrize("e, f", [(2, 1), (3, -1)])
def test_degree6_octahedral_counts(e, f):
    vf = octahedral_degree6_field(e, f)
    count = sphere_vanish_count(vf)
    assert count >= 26
    assert count % 24 == 2


def test_degree6_field_is_tangent():
    vf = octahedral_degree6_field(F(1, 2), 3)
    x, y, z = (MPoly.variable(3, i) for i in range(3))
    a, b, c = vf.numerators
    assert (x * a + y * b + z * c).is_zero


def test_zero_count_of_zero_field():
    with pytest.raises(ZeroFieldError):
        sphere_zeros(VectorField.zero(3))


# ----------------------------------------------------------------------
# image surface identity

def test_surface_identity_holds():
    assert surface_identity_check()


def test_surface_identity_detects_flipped_sign():
    lines = list(SURFACE_FIXTURE)
    lines[2] = lines[2].replace("+ 12*Z^2*Y^2", "- 12*Z^2*Y^2")
    assert lines[2] != SURFACE_FIXTURE[2]
    assert not surface_identity_check(surface_polynomial(lines))


def test_surface_identity_zero_polynomial():
    assert surface_identity_check(MPoly.zero(3))


def test_surface_identity_mixed_parity_path():
    assert not surface_identity_check(parse_poly("X + Y", ("X", "Y", "Z")))


def test_surface_polynomial_is_cyclic():
    p = surface_polynomial()
    shift = [MPoly.variable(3, 1), MPoly.variable(3, 2), MPoly.variable(3, 0)]
    assert p.substitute(shift) == p


# ----------------------------------------------------------------------
# extremal circle ratios

def test_beta2_formula():
    a, c, d = F(2), F(3), F(5)
    assert circle_beta2([a, 0, c, d]) == (5 * a * a + c * c + 5 * d * d + 2 * a * c) / 16


def test_beta_inf_of_x3_minus_xy2():
    value, theta = circle_beta_inf((1.0, 0.0, -1.0, 0.0))
    assert value == pytest.approx(1.0, abs=1e-12)
    assert circle_ratio((1.0, 0.0, -1.0, 0.0)) == pytest.approx(4.0, abs=1e-12)


def test_extremal_max():
    result = extremal_ratio_2_4("max")
    assert result.value == pytest.approx(4.0, abs=1e-6)
    assert result.optimizer == pytest.approx((1.0, 0.0, -1.0, 0.0), abs=1e-6)
    assert result.stationary


def test_extremal_min():
    result = extremal_ratio_2_4("min")
    assert result.value == pytest.approx(XI_2_4, abs=1e-6)
    assert result.value == pytest.approx(1.455668946, abs=1e-6)
    assert result.chart == "d=1"
    assert result.stationary
    a, _, c, d = result.optimizer
    assert d == 1.0
    assert 27 * a ** 3 - 27 * a - 9 * a * c ** 2 - 2 * c ** 3 == pytest.approx(0, abs=1e-6)
    assert json.loads(result.to_json())["mode"] == "min"


def test_extremal_mode_validation():
    with pytest.raises(ValueError):
        extremal_ratio_2_4("mean")
