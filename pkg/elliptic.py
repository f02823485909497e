#!/usr/bin/env python3
"""
Elliptic and Abelian Function Kernels

Jacobi sn/cn/dn through the AGM and descending Landen transformation,
the Weierstrass function with g2 = 16/27, g3 = 0 on the real line and on
the shifted line R + i*omega, the Dixonian pair sm/cm, and the abelian
integral alpha of the dihedral D5 superflow together with its inverse k.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Tuple, Union

import mpmath
from scipy.optimize import brentq
from scipy.special import gamma

from superflow_logging import get_component_logger

logger = get_component_logger("ELLIPTIC")

AGM_TOLERANCE = 1e-16
AGM_MAX_STEPS = 40
POLE_DISTANCE = 1e-6
QUADRATURE_TARGET = 1e-10
QUADRATURE_DPS = 20
K_INFINITY = math.inf


class PoleProximityError(ArithmeticError):
    """Raised when an argument lies within the pole exclusion radius"""


class QuadratureError(ArithmeticError):
    """Raised when a quadrature estimate misses its error target"""


class DegenerateDenominatorError(ZeroDivisionError):
    """Raised when an addition formula has a vanishing denominator"""


# ----------------------------------------------------------------------
# Jacobi functions

@dataclass(frozen=True)
class JacobiTriple:
    u: float
    k: float
    sn: float
    cn: float
    dn: float

    def identity_residual(self) -> float:
        return max(abs(self.sn ** 2 + self.cn ** 2 - 1),
                   abs(self.k ** 2 * self.sn ** 2 + self.dn ** 2 - 1))


def jacobi_snckdn(u: float, k: float, extra_landen: int = 0) -> JacobiTriple:
    """
    sn, cn, dn of real u for modulus 0 <= k <= 1

    Runs the arithmetic-geometric mean until c_n/a_n drops below
    AGM_TOLERANCE (plus extra_landen further steps), then recovers the
    amplitude by the descending recursion
    phi_(n-1) = (phi_n + asin(c_n/a_n * sin(phi_n))) / 2.
    """
    if not 0 <= k <= 1:
        raise ValueError(f"modulus {k} outside [0, 1]")
    if k == 0:
        return JacobiTriple(u, k, math.sin(u), math.cos(u), 1.0)
    if k == 1:
        sech = 1 / math.cosh(u)
        return JacobiTriple(u, k, math.tanh(u), sech, sech)

    a = [1.0]
    b = [math.sqrt(1 - k * k)]
    c = [k]

    def step():
        a_n, b_n = a[-1], b[-1]
        a.append(0.5 * (a_n + b_n))
        b.append(math.sqrt(a_n * b_n))
        c.append(0.5 * (a_n - b_n))

    while abs(c[-1]) > AGM_TOLERANCE * a[-1] and len(a) < AGM_MAX_STEPS:
        step()
    for _ in range(extra_landen):
        step()

    n = len(a) - 1
    phi = 2 ** n * a[n] * u
    for i in range(n, 0, -1):
        phi = 0.5 * (phi + math.asin(c[i] / a[i] * math.sin(phi)))
    sn = math.sin(phi)
    dn = math.sqrt(max(0.0, 1 - k * k * sn * sn))
    return JacobiTriple(u, k, sn, math.cos(phi), dn)


def jacobi_sn_series(k2: Union[Fraction, int], terms: int) -> List[Fraction]:
    """
    Exact Taylor coefficients of sn(u) at 0 for the given k^2

    Returns the coefficients of u, u^3, ..., u^(2*terms-1) from
    sn'' = -(1 + k^2) sn + 2 k^2 sn^3.
    """
    k2 = Fraction(k2)
    size = 2 * terms
    coeffs = [Fraction(0)] * (size + 2)
    coeffs[1] = Fraction(1)
    for n in range(1, size - 1):
        cube = Fraction(0)
        for i in range(n + 1):
            if not coeffs[i]:
                continue
            for j in range(n - i + 1):
                if coeffs[j] and coeffs[n - i - j]:
                    cube += coeffs[i] * coeffs[j] * coeffs[n - i - j]
        coeffs[n + 2] = (-(1 + k2) * coeffs[n] + 2 * k2 * cube) / ((n + 2) * (n + 1))
    return [coeffs[2 * i + 1] for i in range(terms)]


# ----------------------------------------------------------------------
# Weierstrass function, g2 = 16/27, g3 = 0

G2 = Fraction(16, 27)
LAURENT_ORDER = 46


def weierstrass_laurent(order: int) -> Dict[int, Fraction]:
    """
    Exact Laurent coefficients of p(t) = 1/t^2 + sum c_k t^(2k-2), powers up to order

    c_2 = g2/20, c_3 = g3/28 = 0 and
    c_k = 3/((2k+1)(k-3)) * sum_(m=2..k-2) c_m c_(k-m) for k >= 4.
    """
    c: Dict[int, Fraction] = {2: G2 / 20, 3: Fraction(0)}
    k = 4
    while 2 * k - 2 <= order:
        total = sum((c[m] * c[k - m] for m in range(2, k - 1)), Fraction(0))
        c[k] = Fraction(3, (2 * k + 1) * (k - 3)) * total
        k += 1
    out = {-2: Fraction(1)}
    for k, value in c.items():
        if value and 2 * k - 2 <= order:
            out[2 * k - 2] = value
    return out


@dataclass(frozen=True)
class WeierstrassContext:
    g2: float
    g3: float
    omega: float
    e1: float
    regular_terms: Tuple[Tuple[int, float], ...] = field(repr=False)

    def regular_part(self, t: float) -> Tuple[float, float]:
        """p(t) - 1/t^2 and its derivative from the Laurent tail"""
        value = 0.0
        slope = 0.0
        for power, coeff in self.regular_terms:
            value += coeff * t ** power
            slope += power * coeff * t ** (power - 1)
        return value, slope


@lru_cache(maxsize=None)
def weierstrass_context() -> WeierstrassContext:
    omega = 3 ** 0.75 * gamma(0.25) ** 2 / (8 * math.sqrt(math.pi))
    tail = tuple((p, float(c)) for p, c in sorted(weierstrass_laurent(LAURENT_ORDER).items()) if p > 0)
    return WeierstrassContext(float(G2), 0.0, float(omega), 2 / (3 * math.sqrt(3)), tail)


def wp_duplication(p: float) -> float:
    """p(2t) from p(t) = p"""
    g2 = float(G2)
    denominator = 4 * p ** 3 - g2 * p
    if denominator == 0:
        raise DegenerateDenominatorError("duplication at a half-period")
    return (p * p + g2 / 4) ** 2 / denominator


def _wp_series(t: float) -> Tuple[float, float]:
    ctx = weierstrass_context()
    reg, dreg = ctx.regular_part(t)
    return 1 / (t * t) + reg, -2 / t ** 3 + dreg


def _wp_real(t: float) -> Tuple[float, float]:
    ctx = weierstrass_context()
    omega = ctx.omega
    r = math.fmod(t, 2 * omega)
    if r < 0:
        r += 2 * omega
    if min(r, 2 * omega - r) < POLE_DISTANCE:
        raise PoleProximityError(f"t={t} is within {POLE_DISTANCE} of a lattice point")
    sign = 1.0
    if r > omega:
        r = 2 * omega - r
        sign = -1.0
    if r <= omega / 2:
        p, dp = _wp_series(r)
        return p, sign * dp
    half, dhalf = _wp_series(r / 2)
    p = wp_duplication(half)
    # p'(2s) = F'(p(s)) p'(s) / 2 with F the duplication map
    num = (half * half + ctx.g2 / 4) ** 2
    den = 4 * half ** 3 - ctx.g2 * half
    dnum = 4 * half * (half * half + ctx.g2 / 4)
    dden = 12 * half * half - ctx.g2
    dp = (dnum * den - num * dden) / (den * den) * dhalf / 2
    return p, sign * dp


def upsilon(t: float) -> Tuple[float, float]:
    """
    Upsilon(t) = p(t + i*omega) for real t, with its derivative

    Uses the half-period shift p(z + i*omega) = -e1 + 2 e1^2 / (p(z) + e1),
    written through 1/p so the pole of p at t = 0 is harmless.
    """
    ctx = weierstrass_context()
    e1 = ctx.e1
    omega = ctx.omega
    r = math.fmod(t, 2 * omega)
    if r < 0:
        r += 2 * omega
    sign = 1.0
    if r > omega:
        r = 2 * omega - r
        sign = -1.0
    if r <= omega / 2:
        reg, dreg = ctx.regular_part(r)
        base = 1 + r * r * reg
        inv = r * r / base
        dp_inv2 = (-2 * r + r ** 4 * dreg) / base ** 2
    else:
        p, dp = _wp_real(r)
        inv = 1 / p
        dp_inv2 = dp * inv * inv
    value = -e1 + 2 * e1 * e1 * inv / (1 + e1 * inv)
    slope = -2 * e1 * e1 * dp_inv2 / (1 + e1 * inv) ** 2
    return value, sign * slope


def weierstrass_p(t: Union[float, complex]) -> Tuple[float, float]:
    """
    p(t) and p'(t) for t on the real line or on R + i*omega

    Raises:
        PoleProximityError: t is within POLE_DISTANCE of the lattice
        ValueError: t lies on neither line
    """
    t = complex(t)
    ctx = weierstrass_context()
    if abs(t.imag) < 1e-12:
        return _wp_real(t.real)
    if abs(t.imag - ctx.omega) < 1e-9:
        return upsilon(t.real)
    raise ValueError("p is evaluated only on R and R + i*omega")


def weierstrass_addition(u: float, v: float) -> float:
    """
    Upsilon(u - v) from the addition formula
    1/4 * ((U'(u) + p'(v)) / (U(u) - p(v)))^2 - U(u) - p(v)
    """
    ups, dups = upsilon(u)
    p, dp = _wp_real(v)
    denominator = ups - p
    if abs(denominator) < 1e-12:
        raise DegenerateDenominatorError(f"Upsilon({u}) equals p({v})")
    return 0.25 * ((dups + dp) / denominator) ** 2 - ups - p


# ----------------------------------------------------------------------
# Dixonian functions

DIXON_ORDER = 60


@lru_cache(maxsize=None)
def dixon_series(order: int) -> Tuple[Tuple[Fraction, ...], Tuple[Fraction, ...]]:
    """Exact Taylor coefficients of sm and cm at 0 through z^order"""
    s = [Fraction(0)]
    c = [Fraction(1)]
    for n in range(order):
        cc = sum((c[i] * c[n - i] for i in range(n + 1)), Fraction(0))
        ss = sum((s[i] * s[n - i] for i in range(n + 1)), Fraction(0))
        s.append(cc / (n + 1))
        c.append(-ss / (n + 1))
    return tuple(s), tuple(c)


@lru_cache(maxsize=None)
def dixon_period() -> float:
    """Real period pi_3 = Gamma(1/3)^2 / Gamma(2/3)"""
    return float(gamma(1 / 3) ** 2 / gamma(2 / 3))


@lru_cache(maxsize=None)
def _dixon_float_coeffs() -> Tuple[List[Tuple[int, float]], List[Tuple[int, float]]]:
    s, c = dixon_series(DIXON_ORDER)
    return ([(i, float(v)) for i, v in enumerate(s) if v],
            [(i, float(v)) for i, v in enumerate(c) if v])


def _dixon_taylor(z: float) -> Tuple[float, float]:
    s_terms, c_terms = _dixon_float_coeffs()
    return (sum(v * z ** i for i, v in s_terms),
            sum(v * z ** i for i, v in c_terms))


def dixon_smcm(u: float) -> Tuple[float, float]:
    """
    sm(u), cm(u) for real u

    Reduces u modulo pi_3 to [-pi_3/3, 2 pi_3/3) and evaluates the Taylor
    series on |z| <= pi_3/6 only, through
    sm(pi_3/3 - z) = cm(z), cm(pi_3/3 - z) = sm(z) and
    sm(-z) = -sm(z)/cm(z), cm(-z) = 1/cm(z).
    """
    period = dixon_period()
    third = period / 3
    sixth = period / 6
    r = math.fmod(u + third, period)
    if r < 0:
        r += period
    r -= third
    if min(r + third, 2 * third - r) < POLE_DISTANCE:
        raise PoleProximityError(f"u={u} is within {POLE_DISTANCE} of a pole of sm")

    def near_origin(z: float) -> Tuple[float, float]:
        if z <= sixth:
            return _dixon_taylor(z)
        s, c = _dixon_taylor(third - z)
        return c, s

    if -sixth <= r <= period / 2:
        return near_origin(r)
    z = -r if r < 0 else period - r
    s, c = near_origin(z)
    return -s / c, 1 / c


# ----------------------------------------------------------------------
# D5 abelian integral

D5_W = (1, -5, -10, 10, 5, -1)


def d5_w(x: float) -> float:
    """W(x) = x^5 - 5x^4 - 10x^3 + 10x^2 + 5x - 1"""
    value = 0.0
    for c in D5_W:
        value = value * x + c
    return value


def mobius_shift(y: float, j: int) -> float:
    """(y cos k_j + sin k_j) / (-y sin k_j + cos k_j) with k_j = 2 pi j / 5"""
    if math.isinf(y):
        kappa = 2 * math.pi * j / 5
        return -1 / math.tan(kappa) if math.sin(kappa) else y
    kappa = 2 * math.pi * j / 5
    den = -y * math.sin(kappa) + math.cos(kappa)
    if den == 0:
        return K_INFINITY
    return (y * math.cos(kappa) + math.sin(kappa)) / den


def _xi_roots_mp() -> List[mpmath.mpf]:
    return [mpmath.tan(mpmath.pi / 4 + 2 * mpmath.pi * j / 5) for j in range(5)]


def _snap(x, roots):
    """The root of W within 1e-12 (relative) of x, else x itself"""
    for r in roots:
        if abs(x - r) < mpmath.mpf("1e-12") * max(1, abs(r)):
            return r
    return x


def _segment(a, b, roots, target: float):
    """Integral of (t^2+1)/|W(t)|^(4/5) over [a, b] with roots of W only at the ends"""
    def is_root(x):
        return any(x == r for r in roots)

    if is_root(a) and is_root(b):
        mid = (a + b) / 2
        return _segment(a, mid, roots, target) + _segment(mid, b, roots, target)

    if not is_root(a) and not is_root(b):
        def integrand(t):
            return (t * t + 1) / abs(_w_mp(t)) ** mpmath.mpf(0.8)
        value, err = mpmath.quad(integrand, [a, b], error=True)
        _check_quadrature(err, target, a, b)
        return value

    root, end = (a, b) if is_root(a) else (b, a)
    others = [r for r in roots if r != root]

    def antiderivative(t):
        u = abs(t - root)
        sigma = 1 if t > root else -1
        return sigma * (mpmath.mpf(5) / 11 * u ** mpmath.mpf(2.2)
                        + sigma * mpmath.mpf(5) / 3 * root * u ** mpmath.mpf(1.2)
                        + 5 * (root * root + 1) * u ** mpmath.mpf(0.2))

    def cofactor(t):
        return abs(mpmath.fprod(t - r for r in others)) ** mpmath.mpf(-0.8)

    def remainder(t):
        log_slope = mpmath.fsum(1 / (t - r) for r in others)
        return antiderivative(t) * cofactor(t) * log_slope

    tail, err = mpmath.quad(remainder, [root, end], error=True)
    _check_quadrature(err, target, root, end)
    value = antiderivative(end) * cofactor(end) + mpmath.mpf(0.8) * tail
    return value if root == a else -value


def _w_mp(t):
    value = mpmath.mpf(0)
    for c in D5_W:
        value = value * t + c
    return value


def _check_quadrature(err, target: float, a, b):
    if err > target:
        raise QuadratureError(f"quadrature on [{float(a):.6g}, {float(b):.6g}] "
                              f"reached error {float(err):.3e} > {target:.1e}")


def _path_integral(a, b, roots, target: float):
    """Integral from a to b (either order), split at interior roots, regularized at each root"""
    a, b = _snap(a, roots), _snap(b, roots)
    if a == b:
        return mpmath.mpf(0)
    lo, hi = (a, b) if a < b else (b, a)
    points = [lo] + sorted(r for r in roots if lo < r < hi) + [hi]
    total = mpmath.fsum(_segment(p, q, roots, target) for p, q in zip(points, points[1:]))
    return total if a < b else -total


@dataclass(frozen=True)
class D5AbelianContext:
    Omega: float
    Xi: float
    xi_roots: Tuple[float, ...]
    alpha_at_roots: Tuple[float, ...]
    quad_target: float = QUADRATURE_TARGET
    dps: int = QUADRATURE_DPS

    @property
    def period(self) -> float:
        return 5 * self.Omega

    @property
    def ratio(self) -> float:
        """Xi / Omega, reported only"""
        return self.Xi / self.Omega

    def reduce(self, value: float) -> float:
        """Representative of value mod 5*Omega in (Xi - 5*Omega, Xi]"""
        low = self.Xi - self.period
        shifted = math.fmod(value - low, self.period)
        if shifted <= 0:
            shifted += self.period
        return low + shifted


@lru_cache(maxsize=None)
def d5_context(quad_target: float = QUADRATURE_TARGET, dps: int = QUADRATURE_DPS) -> D5AbelianContext:
    with mpmath.workdps(dps):
        roots = _xi_roots_mp()
        omega = mpmath.mpf(2) / 5 * _path_integral(mpmath.mpf(-1), mpmath.mpf(1), roots, quad_target)
        xi = _path_integral(mpmath.mpf(0), mpmath.mpf(1), roots, quad_target)
        at_roots = tuple(float(_path_integral(mpmath.mpf(1), r, roots, quad_target)) for r in roots)
        ctx = D5AbelianContext(float(omega), float(xi), tuple(float(r) for r in roots),
                               at_roots, quad_target, dps)
    logger.info(f"D5 periods: Omega={ctx.Omega:.12f}, Xi={ctx.Xi:.12f}, Xi/Omega={ctx.ratio:.12f}")
    return ctx


def d5_alpha(x: float, ctx: D5AbelianContext = None) -> float:
    """
    alpha(x) = integral from 1 to x of (t^2+1)/W(t)^(4/5), real fifth roots

    The value is reduced mod 5*Omega into (Xi - 5*Omega, Xi]. Near each
    root r of W the integrand is integrated by parts against
    T(t) = integral from r to t of (s^2+1)|s-r|^(-4/5) ds, leaving a
    remainder with no endpoint pole. Arguments within 1e-12 of a root are
    taken at the root. Arguments with |x| > 10 go through
    alpha(1/x) = -alpha(x).

    Raises:
        QuadratureError: an estimate misses the quadrature target
    """
    ctx = ctx or d5_context()
    if math.isinf(x):
        return ctx.Xi if x > 0 else ctx.reduce(ctx.Xi - ctx.period)
    if abs(x) > 10:
        return ctx.reduce(-d5_alpha(1 / x, ctx))
    with mpmath.workdps(ctx.dps):
        value = _path_integral(mpmath.mpf(1), mpmath.mpf(x), _xi_roots_mp(), ctx.quad_target)
    return ctx.reduce(float(value))


def d5_alpha_derivative(x: float) -> float:
    return (x * x + 1) / abs(d5_w(x)) ** 0.8


def d5_k(t: float, ctx: D5AbelianContext = None) -> float:
    """
    Inverse of alpha, periodic with period 5*Omega

    t is reduced to s + 2j*Omega with |s| <= Omega/2; k(s) is found by a
    bracketed Brent solve on the branch [0.45, 2.1] around k(0) = 1 and
    mapped back through k(s + 2j*Omega) = mobius_shift(k(s), j).
    Returns K_INFINITY at t = Xi.
    """
    ctx = ctx or d5_context()
    if abs(ctx.reduce(t) - ctx.Xi) < 1e-12:
        return K_INFINITY
    base = math.fmod(t, ctx.period)
    if base < 0:
        base += ctx.period
    m = int(round(base / ctx.Omega))
    s = base - m * ctx.Omega
    j = (3 * m) % 5
    if s == 0:
        y = 1.0
    else:
        y = brentq(lambda v: _alpha_branch(v, ctx) - s, 0.45, 2.1, xtol=1e-15, maxiter=200)
    return mobius_shift(y, j)


def _alpha_branch(v: float, ctx: D5AbelianContext) -> float:
    # principal integral on the branch; no reduction inside (-Omega, Omega)
    with mpmath.workdps(ctx.dps):
        return float(_path_integral(mpmath.mpf(1), mpmath.mpf(v), _xi_roots_mp(), ctx.quad_target))


def d5_constants(ctx: D5AbelianContext = None) -> Dict[str, float]:
    ctx = ctx or d5_context()
    return {
        "Omega": ctx.Omega,
        "Xi": ctx.Xi,
        "Xi_over_Omega": ctx.ratio,
        **{f"alpha(xi_{j})": value for j, value in enumerate(ctx.alpha_at_roots)},
    }
