#!/usr/bin/env python3
"""
Tests for exact polynomial, rational-function and linear-algebra helpers
"""

import random
from fractions import Fraction

import pytest

from exactalg import (
    DimensionMismatchError,
    MPoly,
    PolySyntaxError,
    RatFunc,
    SingularMatrixError,
    UnknownVariableError,
    VectorField,
    compose_linear,
    conjugate_field,
    curl3,
    divergence,
    homogeneous_components,
    mat_det,
    mat_inverse,
    mat_mul,
    monomials_of_degree,
    nullspace,
    parse_poly,
    radial_pairing,
    rank,
    reduce_mod_sphere,
    rref,
    series_div,
    series_inv,
    series_pow,
)

TETRA = VectorField.from_texts(["y*z", "x*z", "x*y"])


def random_poly(rng: random.Random, nvars: int = 3, degree: int = 3, terms: int = 5) -> MPoly:
    data = {}
    for _ in range(terms):
        exps = tuple(rng.randint(0, degree) for _ in range(nvars))
        data[exps] = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
    return MPoly(nvars, data)


# ----------------------------------------------------------------------
# parsing and serialization

def test_parse_single_monomial():
    p = parse_poly("y*z")
    assert p.terms == {(0, 1, 1): 1}


def test_parse_quadratic_form():
    p = parse_poly("x^2+x*y+y^2", ["x", "y"])
    assert len(p.terms) == 3
    assert p.degree() == 2


def test_parse_rational_coefficients():
    p = parse_poly("3/2*x^2*y - z^3")
    assert p.coefficient((2, 1, 0)) == Fraction(3, 2)
    assert p.coefficient((0, 0, 3)) == -1


def test_parse_parentheses_and_unary_minus():
    assert parse_poly("-(x - y)^2") == parse_poly("-x^2 + 2*x*y - y^2")


def test_parse_ignores_surrounding_whitespace():
    assert parse_poly("x^2 + x ") == parse_poly("x^2 + x")
    assert parse_poly("\t y*z\n") == parse_poly("y*z")
    with pytest.raises(PolySyntaxError):
        parse_poly("   ")


def test_parse_scaled_product():
    assert parse_poly("1/2*(x^2 + x)*(2*x + 1)", ["x"]) == parse_poly("x^3 + 3/2*x^2 + 1/2*x", ["x"])


def test_text_round_trip():
    rng = random.Random(7)
    for _ in range(20):
        p = random_poly(rng)
        assert parse_poly(p.to_text()) == p


def test_zero_serializes_as_zero():
    assert MPoly.zero(3).to_text() == "0"
    assert parse_poly("0").is_zero


def test_syntax_error_carries_position():
    with pytest.raises(PolySyntaxError) as info:
        parse_poly("x + * y")
    assert info.value.position == 4


def test_unknown_variable():
    with pytest.raises(UnknownVariableError):
        parse_poly("x + w")


@pytest.mark.parametrize("text", ["", "x^", "(x + y", "x y", "3/0*x"])
def test_malformed_input(text):
    with pytest.raises(PolySyntaxError):
        parse_poly(text)


# ----------------------------------------------------------------------
# arithmetic

def test_ring_axioms_on_random_triples():
    rng = random.Random(11)
    for _ in range(10):
        p, q, r = (random_poly(rng) for _ in range(3))
        assert (p + q) * r == p * r + q * r
        assert p * q == q * p
        assert (p - p).is_zero


def test_euler_identity_for_homogeneous_parts():
    rng = random.Random(3)
    xs = [MPoly.variable(3, i) for i in range(3)]
    for _ in range(10):
        for d, part in homogeneous_components(random_poly(rng, degree=4)):
            lhs = sum((xs[i] * part.diff(i) for i in range(3)), MPoly.zero(3))
            assert lhs == part * d


def test_mul_truncated_drops_high_degrees():
    p = parse_poly("x + y^2")
    q = parse_poly("1 + z^3")
    assert p.mul_truncated(q, 3) == parse_poly("x + y^2")
    assert p.mul_truncated(q, 4) == parse_poly("x + y^2 + x*z^3")


def test_homogeneous_components():
    assert homogeneous_components(parse_poly("x + x*y")) == [
        (1, parse_poly("x")), (2, parse_poly("x*y"))]
    assert homogeneous_components(MPoly.zero(3)) == []
    w5 = parse_poly("x^5 - 5*x^4*y - 10*x^3*y^2 + 10*x^2*y^3 + 5*x*y^4 - y^5", ["x", "y"])
    parts = homogeneous_components(w5)
    assert len(parts) == 1 and parts[0][0] == 5


def test_monomials_of_degree_count():
    assert len(monomials_of_degree(3, 4)) == 15
    assert len(monomials_of_degree(5, 4)) == 70


# ----------------------------------------------------------------------
# linear substitutions and conjugation

def test_compose_linear_sign_flips_cancel():
    xyz = parse_poly("x*y*z")
    assert compose_linear(xyz, [[-1, 0, 0], [0, -1, 0], [0, 0, 1]]) == xyz


def test_compose_linear_kappa_first_row():
    kappa = [[-1, 0, 0], [-1, 1, 0], [-1, 0, 1]]
    assert compose_linear(parse_poly("x"), kappa) == parse_poly("-x")
    assert compose_linear(parse_poly("y"), kappa) == parse_poly("y - x")


def test_compose_linear_is_multiplicative():
    rng = random.Random(5)
    m = [[1, 2, 0], [0, 1, -1], [Fraction(1, 2), 0, 1]]
    for _ in range(5):
        p, q = random_poly(rng), random_poly(rng)
        assert compose_linear(p * q, m) == compose_linear(p, m) * compose_linear(q, m)


def test_compose_linear_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        compose_linear(parse_poly("x"), [[1, 0], [0, 1]])


def test_conjugate_by_symmetry_returns_field():
    alpha = [[1, 0, 0], [0, -1, 0], [0, 0, -1]]
    assert conjugate_field(TETRA, alpha) == TETRA
    identity = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert conjugate_field(TETRA, identity) == TETRA


def test_conjugate_cyclic_permutation():
    field = VectorField.from_texts(["y^2", "z^2", "x^2"])
    cycle = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
    assert conjugate_field(field, cycle) == field


def test_conjugate_composes_contravariantly():
    field = VectorField.from_texts(["x^2 + y*z", "x*y - z^2", "3*x*z"])
    a = [[1, 1, 0], [0, 1, 0], [0, 0, 2]]
    b = [[0, 1, 0], [1, 0, 0], [1, 0, 1]]
    lhs = conjugate_field(conjugate_field(field, a), b)
    assert lhs == conjugate_field(field, mat_mul(a, b))


def test_conjugate_singular_matrix():
    with pytest.raises(SingularMatrixError):
        conjugate_field(TETRA, [[1, 1, 0], [1, 1, 0], [0, 0, 1]])


# ----------------------------------------------------------------------
# differential operators

def test_divergence_examples():
    assert divergence(TETRA).is_zero
    assert divergence(VectorField.from_texts(["x^2", "0", "0"])) == RatFunc(parse_poly("2*x"))


def test_divergence_of_octahedral_numerator():
    field = VectorField.from_texts(
        ["y*z*(y^2 - z^2)", "x*z*(z^2 - x^2)", "x*y*(x^2 - y^2)"])
    assert divergence(field).is_zero


def test_curl_examples():
    assert curl3(TETRA).is_zero()
    assert curl3(VectorField.zero(3)).is_zero()


def test_curl_of_quartic_and_cubic_fields():
    s4 = VectorField.from_texts(["y^3*z - y*z^3", "z^3*x - z*x^3", "x^3*y - x*y^3"])
    expected = VectorField.from_texts([
        "2*x^3 - 3*x*y^2 - 3*x*z^2",
        "2*y^3 - 3*y*z^2 - 3*y*x^2",
        "2*z^3 - 3*z*x^2 - 3*z*y^2",
    ])
    assert curl3(s4) == expected
    assert curl3(expected).is_zero()

    s3 = VectorField.from_texts(["1/4*x*(z^2 - y^2)", "1/4*y*(x^2 - z^2)", "1/4*z*(y^2 - x^2)"])
    assert curl3(s3) == TETRA


def test_curl_needs_three_dimensions():
    with pytest.raises(DimensionMismatchError):
        curl3(VectorField.from_texts(["y", "x"], ["x", "y"]))


def test_radial_pairing():
    assert not radial_pairing(TETRA).is_zero
    octa = VectorField.from_texts(["y*z*(y^2 - z^2)", "x*z*(z^2 - x^2)", "x*y*(x^2 - y^2)"])
    assert radial_pairing(octa).is_zero


# ----------------------------------------------------------------------
# sphere reduction

def test_reduce_mod_sphere_examples():
    assert reduce_mod_sphere(parse_poly("x^2 + y^2 + z^2 - 1")).is_zero
    assert reduce_mod_sphere(parse_poly("z^4")) == parse_poly("(1 - x^2 - y^2)^2")


def test_reduce_mod_sphere_kills_multiples():
    rng = random.Random(13)
    sphere = parse_poly("x^2 + y^2 + z^2 - 1")
    for _ in range(5):
        assert reduce_mod_sphere(random_poly(rng) * sphere).is_zero


# ----------------------------------------------------------------------
# rational functions and fields

def test_ratfunc_equality_by_cross_multiplication():
    assert RatFunc(parse_poly("x*y"), parse_poly("y")) == parse_poly("x")
    assert RatFunc(parse_poly("x"), parse_poly("y")) != parse_poly("x")


def test_field_degree_and_euler_check():
    assert TETRA.degree() == 2
    assert TETRA.euler_check()
    projective = VectorField(
        [parse_poly("y*z*(y^2 - z^2)"), parse_poly("x*z*(z^2 - x^2)"), parse_poly("x*y*(x^2 - y^2)")],
        parse_poly("x^2 + y^2 + z^2"))
    assert projective.degree() == 2
    assert projective.euler_check()
    assert VectorField.from_texts(["x^2", "y", "0"]).degree() is None


# ----------------------------------------------------------------------
# linear algebra and series

def test_rref_and_rank():
    rows, pivots = rref([[2, 4, 6], [1, 2, 3], [0, 1, 1]])
    assert pivots == [0, 1]
    assert rows == [[1, 0, 1], [0, 1, 1]]
    assert rank([[1, 2], [2, 4]]) == 1


def test_nullspace_basis():
    basis = nullspace([[1, 1, 1]])
    assert len(basis) == 2
    for v in basis:
        assert sum(v) == 0


def test_inverse_and_determinant():
    m = [[2, 1], [7, 4]]
    assert mat_det(m) == 1
    assert mat_mul(m, mat_inverse(m)) == [[1, 0], [0, 1]]
    assert mat_det([[1, 2], [2, 4]]) == 0
    with pytest.raises(SingularMatrixError):
        mat_inverse([[1, 2], [2, 4]])


def test_series_helpers():
    assert series_inv([Fraction(1), Fraction(-1)], 5) == [1, 1, 1, 1, 1]
    assert series_pow([Fraction(1), Fraction(1)], Fraction(1, 2), 4) == [
        1, Fraction(1, 2), Fraction(-1, 8), Fraction(1, 16)]
    assert series_div([Fraction(1)], [Fraction(1), Fraction(1)], 4) == [1, -1, 1, -1]
