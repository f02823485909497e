#!/usr/bin/env python3
"""
Tests for the closed-form flows: series agreement, symmetries, branch
records and comparison with numerical orbit integration
"""

import json
import math
from fractions import Fraction

import pytest

from closedform import (
    DIXON_FIELD,
    GAMMA_FIRST,
    GAMMA_SWAP,
    OCTA_FIELD,
    SERIES_ORDER,
    TETRA_FIELD,
    THEOREM_RAYS,
    LevelViolationError,
    RegionError,
    TripleRootError,
    cardano_branch,
    d5_flow,
    d5_gamma_series,
    d5_gamma_verify,
    evaluate_context,
    lambda_dixon,
    level_ratio,
    octa_J_singular,
    octa_K,
    octa_L,
    octa_V_generic,
    octa_V_singular,
    orbit_point,
    series_match,
    singular_cubic,
    tetra_U,
    upsilon_cubic,
    verify_theorem,
)
from elliptic import weierstrass_p
from flows import flow_at
from reynolds import dihedral_field

SQRT3 = math.sqrt(3)
F = Fraction


# ----------------------------------------------------------------------
# tetrahedral flow

def test_tetra_matches_series_on_generic_ray():
    report = series_match("thm-s4", (3, 1, 2))
    assert report.passed
    assert report.max_mismatch < 1e-10
    assert report.details["series"][0][:4] == ["0", "3", "2", "15/2"]


def test_tetra_trigonometric_case_matches_series():
    # the series along this ray converges only for t below about 0.21
    report = series_match("thm-s4", (5, 4, 5), samples=(0.005, 0.01, 0.02))
    assert report.passed
    ctx = evaluate_context("thm-s4", (0.05, 0.04, 0.05))
    assert ctx.branch["case"] == "trigonometric"


def test_tetra_fixed_ray():
    assert tetra_U(0.7, 0.0, 0.0) == pytest.approx(0.7, abs=1e-14)


def test_tetra_symmetries():
    x, y, z = 0.6, 0.2, 0.4
    u = tetra_U(x, y, z)
    assert tetra_U(-x, -y, z) == pytest.approx(-u, abs=1e-12)
    assert tetra_U(x, z, y) == pytest.approx(u, abs=1e-12)


def test_tetra_against_orbit_integration():
    point = (0.6, 0.2, 0.4)
    assert tetra_U(*point) == pytest.approx(flow_at(TETRA_FIELD, point)[0], abs=1e-9)


@pytest.mark.parametrize("scale", [2.0, 1 / 3])
def test_tetra_scaling_gives_flow_time(scale):
    point = (0.3, 0.1, 0.2)
    scaled = tetra_U(*(scale * v for v in point)) / scale
    assert scaled == pytest.approx(flow_at(TETRA_FIELD, point, scale)[0], abs=1e-9)


def test_tetra_region():
    with pytest.raises(RegionError):
        tetra_U(0.1, 0.5, 0.2)


# ----------------------------------------------------------------------
# S3 flow

def test_lambda_matches_series():
    report = series_match("thm2", (2, 1))
    assert report.passed
    assert len(report.details["series"]) == 2


def test_lambda_diagonal():
    assert lambda_dixon(0.5, 0.5) == pytest.approx((0.5 / 1.5, 0.5 / 1.5))


def test_lambda_conserves_level():
    x, y = 0.4, 0.3
    u, v = lambda_dixon(x, y)
    assert u * v * (u - v) == pytest.approx(x * y * (x - y), rel=1e-10)


def test_lambda_against_orbit_integration():
    point = (0.4, 0.3)
    expected = flow_at(DIXON_FIELD, point)
    assert lambda_dixon(*point) == pytest.approx(tuple(expected), abs=1e-9)


def test_lambda_region():
    with pytest.raises(RegionError):
        lambda_dixon(1.0, 4.0)
    with pytest.raises(RegionError):
        lambda_dixon(-1.0, -1.0)


# ----------------------------------------------------------------------
# octahedral flow, singular orbit

def test_singular_matches_series():
    report = series_match("thm-spec", (3, 2, 1))
    assert report.passed
    assert report.details["series"][0][:6] == ["0", "3", "3/7", "-51/98", "-10/7", "-671/2744"]


def test_singular_J_modulus_and_symmetry():
    x, y, z = 0.9, 0.6, 0.3
    j = octa_J_singular(x, y, z)
    assert abs(j) == pytest.approx(1, abs=1e-12)
    assert octa_J_singular(-x, y, z) * j == pytest.approx(-1, abs=1e-12)


def test_singular_boundary_condition():
    t = 1e-6
    assert octa_V_singular(3 * t, 2 * t, t) / t == pytest.approx(3 + 3 / 7 * t, rel=1e-9)


def test_singular_against_orbit_integration():
    point = (0.9, 0.6, 0.3)
    assert octa_V_singular(*point) == pytest.approx(flow_at(OCTA_FIELD, point)[0], abs=1e-9)


def test_singular_context_records_branch():
    ctx = evaluate_context("thm-spec", (0.9, 0.6, 0.3))
    assert abs(ctx.branch["arg_cube_root"]) <= math.pi / 3
    assert ctx.branch["q"] == "y - z"
    assert json.loads(json.dumps(ctx.to_dict()))["theorem"] == "thm-spec"


def test_singular_preconditions():
    with pytest.raises(RegionError):
        octa_V_singular(1.0, 0.2, 0.3)
    with pytest.raises(RegionError):
        octa_V_singular(-0.3, -0.2, -0.1)


def test_orbit_point_on_singular_level_satisfies_sum_identity():
    x, y, z = orbit_point(0.6, 0.5)
    assert x == pytest.approx(y + z, abs=1e-12)
    assert level_ratio(x, y, z) == pytest.approx(2, abs=1e-12)


# ----------------------------------------------------------------------
# octahedral flow, square-lattice orbit

def test_generic_matches_surd_series():
    report = series_match("thm4", ("sqrt(2)", 1, 0))
    assert report.passed
    assert report.ray == ["sqrt(2)", "1", "0"]


def test_generic_intermediate_J_on_boundary_ray():
    t = 0.3
    ctx = evaluate_context("thm4", (t * math.sqrt(2), t, 0.0))
    p, dp = weierstrass_p(t * SQRT3)
    expected = complex(16 / p, -12 * SQRT3 * dp / p ** 1.5)
    assert ctx.scalars["J"] == pytest.approx(expected, rel=1e-10)
    assert abs(ctx.scalars["J"]) == pytest.approx(24 * SQRT3, rel=1e-12)


def test_generic_cubic_consistency():
    ctx = evaluate_context("thm4", orbit_point(0.7, 5 / 9, 0.5))
    big_p, t = ctx.scalars["P"], ctx.scalars["T"]
    assert 3 * big_p * (3 * big_p - 1) * (3 * big_p - 2) == pytest.approx(-t, abs=1e-12)
    assert 2 / 3 - 1e-12 <= big_p <= (3 + 2 * SQRT3) / 9 + 1e-12


def test_generic_K_and_L_relation():
    x, y, z = orbit_point(0.7, 5 / 9)
    k = octa_K(x, y, z)
    assert octa_L(x, y, z) == pytest.approx(4 * k ** 3 - 16 / 27 * k, abs=1e-12)
    assert k <= 0


def test_generic_against_orbit_integration():
    point = orbit_point(0.7, 5 / 9, 0.5)
    assert octa_V_generic(*point) == pytest.approx(flow_at(OCTA_FIELD, point)[0], abs=1e-9)


def test_generic_preconditions():
    with pytest.raises(LevelViolationError):
        octa_V_generic(0.9, 0.3, 0.2)
    with pytest.raises(RegionError):
        octa_V_generic(*orbit_point(0.2, 5 / 9))


# ----------------------------------------------------------------------
# Cardano branches

def test_cardano_vieta_singular_cubic():
    roots = cardano_branch(singular_cubic(1.0))
    assert roots.total == pytest.approx(1, abs=1e-12)
    assert roots.square_sum == pytest.approx(0.5, abs=1e-12)


def test_cardano_factored_cubic_at_zero():
    roots = cardano_branch(upsilon_cubic(5 / 9, 0.0), rule="sorted")
    assert [r.real for r in roots.roots] == pytest.approx([2 / 3, 1 / 3, 0], abs=1e-12)
    assert all(abs(r.imag) < 1e-12 for r in roots.roots)


def test_cardano_principal_branch_gives_upper_bound():
    roots = cardano_branch(upsilon_cubic(5 / 9, -2 / (3 * SQRT3)))
    assert roots.P == pytest.approx((3 + 2 * SQRT3) / 9, abs=1e-9)


def test_cardano_triple_root():
    with pytest.raises(TripleRootError):
        cardano_branch((1, -3, 3, -1))
    with pytest.raises(ValueError):
        cardano_branch((0, 1, 1, 1))


# ----------------------------------------------------------------------
# D5 flow

def test_gamma_series_reproduces_printed_coefficients():
    first, swap = d5_gamma_series(8)
    assert first == [F(c) for c in GAMMA_FIRST]
    assert swap[:len(GAMMA_SWAP)] == [F(c) for c in GAMMA_SWAP]


def test_gamma_verify_report():
    report = d5_gamma_verify(12)
    assert report.exact
    assert report.max_mismatch == 0
    assert report.passed
    assert report.details["printed_first_match"]
    payload = json.loads(report.to_json())
    assert payload["schema"] == 1
    assert payload["details"]["gamma_first"][0] == "1"


def test_gamma_verify_order_bounds():
    with pytest.raises(ValueError):
        d5_gamma_verify(13)


@pytest.mark.slow
def test_d5_flow_against_orbit_integration():
    point = (0.3, 0.2)
    expected = flow_at(dihedral_field(2), point)
    assert d5_flow(*point) == pytest.approx(tuple(expected), abs=1e-7)


def test_d5_flow_rejects_radial_lines():
    with pytest.raises(RegionError):
        d5_flow(0.5, 0.5)


# ----------------------------------------------------------------------
# dispatch

@pytest.mark.parametrize("name", ["thm2", "thm-s4", "thm-spec", "thm4", "thm-d10"])
def test_verify_theorem_passes(name):
    report = verify_theorem(name)
    assert report.passed
    assert report.theorem == name


@pytest.mark.parametrize("name", ["thm2", "thm-s4", "thm-spec", "thm4"])
def test_series_match_uses_acceptance_samples(name):
    report = series_match(name, THEOREM_RAYS[name])
    assert report.samples == [0.01, 0.05, 0.1]
    assert report.orders == SERIES_ORDER >= 24
    assert report.max_mismatch < 1e-10


def test_low_order_series_fails_at_acceptance_samples():
    report = series_match("thm-s4", (3, 1, 2), order=12)
    assert not report.passed


def test_verify_theorem_unknown():
    with pytest.raises(ValueError):
        verify_theorem("thm9")
