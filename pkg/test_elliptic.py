#!/usr/bin/env python3
"""
Tests for the Jacobi, Weierstrass, Dixonian and D5 abelian kernels
"""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from elliptic import (
    K_INFINITY,
    DegenerateDenominatorError,
    PoleProximityError,
    QuadratureError,
    d5_alpha,
    d5_constants,
    d5_context,
    d5_k,
    d5_w,
    dixon_period,
    dixon_series,
    dixon_smcm,
    jacobi_sn_series,
    jacobi_snckdn,
    mobius_shift,
    upsilon,
    weierstrass_addition,
    weierstrass_context,
    weierstrass_laurent,
    weierstrass_p,
    wp_duplication,
)

MODULI = [0.0, 0.3, math.sqrt(5 / 8), 0.9, 1.0]
E1 = 2 / (3 * math.sqrt(3))


def mod_distance(value: float, period: float) -> float:
    r = math.fmod(value, period)
    return min(abs(r), period - abs(r))


@pytest.fixture(scope="module")
def d5():
    return d5_context()


# ----------------------------------------------------------------------
# Jacobi

@pytest.mark.parametrize("k", MODULI)
def test_jacobi_identities(k):
    for u in np.linspace(-5, 5, 41):
        assert jacobi_snckdn(float(u), k).identity_residual() < 1e-13


def test_jacobi_degenerate_moduli():
    for u in (-2.0, 0.4, 3.0):
        circular = jacobi_snckdn(u, 0.0)
        assert (circular.sn, circular.cn, circular.dn) == (math.sin(u), math.cos(u), 1.0)
        hyperbolic = jacobi_snckdn(u, 1.0)
        assert hyperbolic.sn == math.tanh(u)


@pytest.mark.parametrize("k", [0.3, 0.9, 0.999])
def test_jacobi_matches_reference(k):
    for u in (0.1, 0.9, 2.5, -4.0):
        t = jacobi_snckdn(u, k)
        assert t.sn == pytest.approx(float(mpmath.ellipfun("sn", u, k=k)), abs=1e-12)
        assert t.cn == pytest.approx(float(mpmath.ellipfun("cn", u, k=k)), abs=1e-12)
        assert t.dn == pytest.approx(float(mpmath.ellipfun("dn", u, k=k)), abs=1e-12)


def test_landen_consistency():
    for k in (0.3, 0.9):
        for u in (0.5, 2.0, 4.5):
            a = jacobi_snckdn(u, k)
            b = jacobi_snckdn(u, k, extra_landen=1)
            assert abs(a.sn - b.sn) < 1e-13
            assert abs(a.cn - b.cn) < 1e-13


def test_jacobi_rejects_bad_modulus():
    with pytest.raises(ValueError):
        jacobi_snckdn(1.0, 1.5)


def test_sn_series():
    assert jacobi_sn_series(Fraction(5, 8), 4) == [
        1, Fraction(-13, 48), Fraction(649, 7680), Fraction(-70837, 2580480)]
    assert jacobi_sn_series(0, 3) == [1, Fraction(-1, 6), Fraction(1, 120)]


# ----------------------------------------------------------------------
# Weierstrass

def test_laurent_coefficients():
    assert weierstrass_laurent(18) == {
        -2: 1,
        2: Fraction(4, 135),
        6: Fraction(16, 54675),
        10: Fraction(128, 95954625),
        14: Fraction(256, 44043172875),
        18: Fraction(2048, 89187425071875),
    }


def test_real_half_period():
    assert weierstrass_context().omega == pytest.approx(2.1131881555, abs=1e-9)


def test_half_period_values():
    omega = weierstrass_context().omega
    assert weierstrass_p(omega)[0] == pytest.approx(E1, abs=1e-12)
    assert weierstrass_p(1j * omega)[0] == pytest.approx(-E1, abs=1e-12)
    assert weierstrass_p(omega + 1j * omega)[0] == pytest.approx(0.0, abs=1e-12)


def test_differential_equation_residual():
    omega = weierstrass_context().omega
    g2 = 16 / 27
    for t in np.linspace(0.3, 2 * omega - 0.3, 37):
        p, dp = weierstrass_p(float(t))
        assert abs(dp ** 2 - (4 * p ** 3 - g2 * p)) / max(1.0, dp ** 2) < 1e-12


def test_derivative_sign_follows_path():
    omega = weierstrass_context().omega
    assert weierstrass_p(0.5 * omega)[1] < 0
    assert weierstrass_p(0.8 * omega)[1] < 0
    assert weierstrass_p(1.3 * omega)[1] > 0


def test_derivative_vanishes_at_half_period():
    omega = weierstrass_context().omega
    assert abs(weierstrass_p(omega)[1]) < 1e-12
    assert abs(weierstrass_p(omega - 1e-7)[1]) < 1e-6
    h = 1e-5
    for t in (0.6 * omega, 0.9 * omega, omega - 0.01, 1.2 * omega):
        numeric = (weierstrass_p(t + h)[0] - weierstrass_p(t - h)[0]) / (2 * h)
        assert weierstrass_p(t)[1] == pytest.approx(numeric, abs=1e-8)


def test_duplication():
    omega = weierstrass_context().omega
    for t in np.linspace(0.1, omega / 4, 10):
        direct = weierstrass_p(2 * float(t))[0]
        assert wp_duplication(weierstrass_p(float(t))[0]) == pytest.approx(direct, rel=1e-11)


def test_upsilon_is_non_positive_and_periodic():
    omega = weierstrass_context().omega
    for t in np.linspace(0, 2 * omega, 61):
        value = upsilon(float(t))[0]
        assert value <= 1e-15
        assert 4 * value ** 2 - 16 / 27 <= 1e-12
        assert upsilon(float(t) + 2 * omega)[0] == pytest.approx(value, abs=1e-10)


def test_upsilon_derivative():
    h = 1e-5
    for t in (0.0, 0.4, 1.7, 3.0):
        numeric = (upsilon(t + h)[0] - upsilon(t - h)[0]) / (2 * h)
        assert upsilon(t)[1] == pytest.approx(numeric, abs=1e-8)


def test_addition_formula():
    omega = weierstrass_context().omega
    for u in (0.3, 1.0, 2.5):
        assert abs(weierstrass_addition(u, omega) - upsilon(u - omega)[0]) < 1e-10
    rng = np.random.default_rng(20240607)
    worst = 0.0
    for u, v in rng.uniform(0.2, 1.5, size=(20, 2)):
        worst = max(worst, abs(weierstrass_addition(float(u), float(v)) - upsilon(float(u - v))[0]))
    assert worst < 1e-9


def test_poles_and_bad_arguments():
    omega = weierstrass_context().omega
    with pytest.raises(PoleProximityError):
        weierstrass_p(0.0)
    with pytest.raises(PoleProximityError):
        weierstrass_p(2 * omega + 1e-8)
    with pytest.raises(ValueError):
        weierstrass_p(1 + 0.5j)
    with pytest.raises(DegenerateDenominatorError):
        wp_duplication(0.0)


# ----------------------------------------------------------------------
# Dixonian functions

def test_dixon_series():
    sm, cm = dixon_series(7)
    assert sm[1] == 1 and sm[4] == Fraction(-1, 6) and sm[7] == Fraction(2, 63)
    assert cm[0] == 1 and cm[3] == Fraction(-1, 3) and cm[6] == Fraction(1, 18)


def test_dixon_period():
    assert dixon_period() == pytest.approx(5.29991625, rel=1e-7)


def test_dixon_anchor_values():
    assert dixon_smcm(0.0) == (0.0, 1.0)
    s, c = dixon_smcm(dixon_period() / 3)
    assert s == pytest.approx(1.0, abs=1e-13)
    assert c == pytest.approx(0.0, abs=1e-13)


def test_dixon_cubic_identity():
    for u in np.linspace(-1.5, 3.3, 49):
        s, c = dixon_smcm(float(u))
        assert abs(s ** 3 + c ** 3 - 1) / max(1.0, abs(s) ** 3) < 1e-13


def test_dixon_derivatives():
    h = 1e-5
    for u in (-1.0, 0.3, 1.2, 2.4, 3.0):
        ds = (dixon_smcm(u + h)[0] - dixon_smcm(u - h)[0]) / (2 * h)
        dc = (dixon_smcm(u + h)[1] - dixon_smcm(u - h)[1]) / (2 * h)
        s, c = dixon_smcm(u)
        assert ds == pytest.approx(c * c, abs=1e-8 * max(1.0, c * c))
        assert dc == pytest.approx(-s * s, abs=1e-8 * max(1.0, s * s))


def test_dixon_periodicity_and_poles():
    period = dixon_period()
    for u in (0.2, 1.9, -1.2):
        assert dixon_smcm(u + period)[0] == pytest.approx(dixon_smcm(u)[0], abs=1e-11)
    with pytest.raises(PoleProximityError):
        dixon_smcm(2 * period / 3)
    with pytest.raises(PoleProximityError):
        dixon_smcm(-period / 3)


# ----------------------------------------------------------------------
# D5 abelian integral

def test_w_roots(d5):
    assert all(abs(d5_w(r)) < 1e-10 for r in d5.xi_roots)
    xi = d5.xi_roots
    assert xi[1] < xi[4] < xi[2] < xi[0] < xi[3]


def test_periods(d5):
    assert d5.Omega == pytest.approx(1.7162590512, abs=1e-8)
    assert d5.Xi == pytest.approx(2.4439543584, abs=1e-8)


def test_alpha_anchor_values(d5):
    assert d5_alpha(1.0) == pytest.approx(0.0, abs=1e-14)
    expected = {3: d5.Omega, 2: -d5.Omega, 4: -2 * d5.Omega, 1: -3 * d5.Omega}
    for j, value in expected.items():
        assert mod_distance(d5.alpha_at_roots[j] - value, d5.period) < 1e-7
        assert mod_distance(d5_alpha(d5.xi_roots[j]) - value, d5.period) < 1e-7


def test_alpha_at_zero_and_infinity(d5):
    assert mod_distance(d5_alpha(0.0) + d5.Xi, d5.period) < 1e-8
    assert d5_alpha(math.inf) == d5.Xi


def test_alpha_involution(d5):
    rng = np.random.default_rng(7)
    for x in list(rng.uniform(-4, 4, size=5)) + [12.0, -30.0]:
        x = float(x)
        assert mod_distance(d5_alpha(x) + d5_alpha(1 / x), d5.period) < 1e-8


def test_alpha_is_increasing():
    values = [d5_alpha(x) for x in (-1.5, -1.0, -0.3, 0.5, 0.9)]
    assert values == sorted(values)


def test_k_value_table(d5):
    xi = d5.xi_roots
    assert d5_k(0.0) == 1.0
    for m, j in ((1, 3), (2, 1), (3, 4), (4, 2)):
        assert d5_k(m * d5.Omega) == pytest.approx(xi[j], rel=1e-8)


def test_k_half_steps(d5):
    xi = d5.xi_roots
    assert d5_k(d5.Omega / 2) == pytest.approx(-xi[1], rel=1e-7)
    assert d5_k(2.5 * d5.Omega) == pytest.approx(-1.0, rel=1e-7)


def test_k_reciprocity_and_period(d5):
    for x in (0.2, 1.1, 3.0):
        assert d5_k(x) * d5_k(-x) == pytest.approx(1.0, abs=1e-9)
        assert d5_k(x + d5.period) == pytest.approx(d5_k(x), rel=1e-9)


def test_k_inverts_alpha(d5):
    for t in (0.4, -0.7):
        assert mod_distance(d5_alpha(d5_k(t)) - t, d5.period) < 1e-9


def test_k_infinity_marker(d5):
    assert d5_k(d5.Xi) == K_INFINITY
    assert abs(d5_k(d5.period - d5.Xi)) < 1e-8


def test_k_mobius_shift(d5):
    x = 0.3
    for j in range(1, 5):
        assert d5_k(x + 2 * j * d5.Omega) == pytest.approx(mobius_shift(d5_k(x), j), rel=1e-8)


def test_k_differential_equation():
    h = 1e-3
    for x in (0.3, 0.6):
        ks = [d5_k(x + i * h) for i in (-2, -1, 1, 2)]
        slope = (-ks[3] + 8 * ks[2] - 8 * ks[1] + ks[0]) / (12 * h)
        k = d5_k(x)
        assert abs(slope ** 5 - d5_w(k) ** 4 / (k * k + 1) ** 5) < 1e-8


def test_constants_report(d5):
    report = d5_constants()
    assert report["Omega"] == d5.Omega
    assert report["Xi_over_Omega"] == pytest.approx(d5.Xi / d5.Omega)
    assert len([key for key in report if key.startswith("alpha(")]) == 5


def test_quadrature_target_enforced():
    with pytest.raises(QuadratureError):
        d5_context(quad_target=1e-60, dps=15)
