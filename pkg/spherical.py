#!/usr/bin/env python3
"""
Spherical Constants and Vector Fields on Spheres

Exact monomial averages over spheres, the averages alpha_0, alpha_1,
alpha_2 and alpha_inf of a sphere field with their ratios to alpha_2,
zero counting on the unit sphere, the exact check of the implicit
equation of the octahedral image surface, and the extremal ratios
beta_inf^2 / beta_2 for quartic fields on the circle.
"""

import heapq
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy import optimize

from elliptic import QuadratureError
from exactalg import (
    MPoly,
    VectorField,
    compose_linear,
    conjugate_field,
    mat_mul,
    parse_poly,
    reduce_mod_sphere,
)
from superflow_logging import OperationContext, get_component_logger, log_check

logger = get_component_logger("SPHERICAL")

QUADRATURE_TOLERANCE = 1e-8
LOG_QUADRATURE_TOLERANCE = 1e-6
QUADRATURE_ORDER = 6
MAX_TILES = 400000
CLUSTER_TOLERANCE = 1e-7
NEWTON_TOLERANCE = 1e-14
CERTIFICATE_TOLERANCE = 1e-8
ROTATION_TOLERANCE = 1e-12

OCTA_SPHERE_FIELD = ("y^3*z - y*z^3", "z^3*x - z*x^3", "x^3*y - x*y^3")

# one representative per line; each line is summed over cyclic shifts of (X, Y, Z)
SURFACE_FIXTURE = (
    "X^12*(Y^2 + Z^2)^2",
    "9*X^11*Y*Z*(Y^2 - Z^2)",
    "X^10*(44*Z^2*Y^4 + 44*Z^4*Y^2 + 12*Z^2*Y^2 - 4*Y^6 - 4*Z^6)",
    "-X^9*Y*Z*(Y^2 - Z^2)*(18*Y^2 + 18*Z^2 + 1)",
    "6*Y^8*Z^8",
    "2*X^8*Y^2*Z^2*(340*Y^2*Z^2 - 23*Y^4 - 23*Z^4 - 18*Y^2 - 18*Z^2)",
    "3*X^7*Y*Z*(Y^2 - Z^2)*(Y^2 + Z^2 - 90*Y^2*Z^2)",
    "48*X^2*Y^6*Z^6 + 1050*X^4*Z^6*Y^6 + 12*X^6*Y^4*Z^4",
)
SURFACE_NAMES = ("X", "Y", "Z")


class ZeroFieldError(ValueError):
    """Raised when the field vanishes identically on the sphere"""


class NonConvergenceError(RuntimeError):
    """Raised when an iterative search exhausts its budget"""


@dataclass
class SphericalConstants:
    alpha0: float
    alpha1: float
    alpha2: Fraction
    alpha_inf: float
    Omega0: float
    Omega1: float
    OmegaInf: float
    radius: float = 1.0
    methods: Dict[str, str] = field(default_factory=dict)
    errors: Dict[str, float] = field(default_factory=dict)
    alpha_inf_point: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": 1,
            "alpha0": _jsonable(self.alpha0),
            "alpha1": _jsonable(self.alpha1),
            "alpha2": _jsonable(self.alpha2),
            "alpha2_float": _jsonable(float(self.alpha2)),
            "alpha_inf": _jsonable(self.alpha_inf),
            "Omega0": _jsonable(self.Omega0),
            "Omega1": _jsonable(self.Omega1),
            "OmegaInf": _jsonable(self.OmegaInf),
            "radius": _jsonable(self.radius),
            "methods": dict(self.methods),
            "errors": {k: _jsonable(v) for k, v in self.errors.items()},
            "alpha_inf_point": _jsonable(self.alpha_inf_point),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass
class ExtremalResult:
    mode: str
    value: float
    optimizer: Tuple[float, float, float, float]
    certificate: float
    chart: str
    constraint: Optional[str] = None

    @property
    def stationary(self) -> bool:
        return self.certificate < CERTIFICATE_TOLERANCE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": 1,
            "mode": self.mode,
            "value": _jsonable(self.value),
            "optimizer": _jsonable(list(self.optimizer)),
            "certificate": _jsonable(self.certificate),
            "chart": self.chart,
            "constraint": self.constraint,
            "stationary": self.stationary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else value.numerator
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.17g}")
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    return value


# ----------------------------------------------------------------------
# exact moments

def _double_factorial(k: int) -> int:
    result = 1
    while k > 1:
        result *= k
        k -= 2
    return result


def sphere_monomial_average(exponents: Sequence[int]) -> Fraction:
    """
    Average of x_1^a_1 ... x_n^a_n over the unit sphere in n variables

    Zero when some exponent is odd, otherwise
    prod (a_i - 1)!! / (n (n + 2) ... (n + sum a_i - 2)).
    """
    exps = [int(a) for a in exponents]
    if not exps or any(a < 0 for a in exps):
        raise ValueError("exponents must be a non-empty sequence of non-negative integers")
    if any(a % 2 for a in exps):
        return Fraction(0)
    n = len(exps)
    numerator = 1
    for a in exps:
        numerator *= _double_factorial(a - 1)
    denominator = 1
    for k in range(sum(exps) // 2):
        denominator *= n + 2 * k
    return Fraction(numerator, denominator)


def sphere_average(p: MPoly, radius: Any = 1) -> Fraction:
    """Exact average of a polynomial over the sphere of the given radius"""
    r = Fraction(radius)
    total = Fraction(0)
    for e, c in p.terms.items():
        avg = sphere_monomial_average(e)
        if avg:
            total += c * avg * r ** sum(e)
    return total


def squared_norm(vf: VectorField) -> MPoly:
    if not vf.is_polynomial():
        raise ValueError("spherical constants need a polynomial field")
    total = MPoly.zero(vf.nvars)
    for p in vf.polynomial_components():
        total = total + p * p
    return total


# ----------------------------------------------------------------------
# adaptive quadrature on the sphere

class _TileQuadrature:
    """Global adaptive Gauss product rule in (theta, phi) over tiles of the sphere"""

    def __init__(self, integrand: Callable[[np.ndarray], np.ndarray],
                 radius: float = 1.0, order: int = QUADRATURE_ORDER):
        if order < 2:
            raise ValueError("quadrature order must be at least 2")
        nodes, weights = np.polynomial.legendre.leggauss(order)
        u = (nodes + 1) / 2
        self.u = np.repeat(u, order)
        self.v = np.tile(u, order)
        self.w = np.outer(weights, weights).ravel() / 4
        self.integrand = integrand
        self.radius = radius
        self.evaluations = 0

    def values(self, tiles: np.ndarray) -> np.ndarray:
        t0, t1, p0, p1 = (tiles[:, i:i + 1] for i in range(4))
        theta = t0 + (t1 - t0) * self.u
        phi = p0 + (p1 - p0) * self.v
        sin_t = np.sin(theta)
        points = self.radius * np.stack(
            [sin_t * np.cos(phi), sin_t * np.sin(phi), np.cos(theta)], axis=-1)
        f = self.integrand(points)
        self.evaluations += f.size
        return (f * sin_t) @ self.w * ((t1 - t0) * (p1 - p0)).ravel()

    @staticmethod
    def split(tiles: np.ndarray) -> np.ndarray:
        t0, t1, p0, p1 = tiles.T
        tm, pm = (t0 + t1) / 2, (p0 + p1) / 2
        quads = [(t0, tm, p0, pm), (t0, tm, pm, p1), (tm, t1, p0, pm), (tm, t1, pm, p1)]
        return np.stack([np.stack(q, axis=-1) for q in quads], axis=1).reshape(-1, 4)

    def _refined(self, tiles: np.ndarray, coarse: np.ndarray):
        children = self.split(tiles)
        child_values = self.values(children)
        fine = child_values.reshape(-1, 4).sum(axis=1)
        return children.reshape(-1, 4, 4), child_values.reshape(-1, 4), fine, np.abs(fine - coarse)

    def average(self, tolerance: float, max_tiles: int = MAX_TILES,
                theta_cells: int = 6, phi_cells: int = 12) -> Tuple[float, float]:
        """
        Average of the integrand over the sphere

        Returns:
            (average, estimated absolute error of the average)
        """
        thetas = np.linspace(0, math.pi, theta_cells + 1)
        phis = np.linspace(0, 2 * math.pi, phi_cells + 1)
        tiles = np.array([(thetas[i], thetas[i + 1], phis[j], phis[j + 1])
                          for i in range(theta_cells) for j in range(phi_cells)])
        coarse = self.values(tiles)
        children, child_values, fine, err = self._refined(tiles, coarse)

        heap: List[Tuple[float, int, np.ndarray, np.ndarray, float]] = []
        counter = 0
        for k in range(len(tiles)):
            heap.append((-err[k], counter, children[k], child_values[k], fine[k]))
            counter += 1
        heapq.heapify(heap)
        total = float(fine.sum())
        total_err = float(err.sum())
        budget = tolerance * 4 * math.pi
        active = len(heap)

        while total_err > budget:
            if active > max_tiles:
                raise QuadratureError(
                    f"sphere quadrature exceeded {max_tiles} tiles "
                    f"with error {total_err / (4 * math.pi):.3e}")
            neg_err, _, kids, kid_values, value = heapq.heappop(heap)
            total -= value
            total_err += neg_err
            grand, grand_values, kid_fine, kid_err = self._refined(kids, kid_values)
            for k in range(4):
                heapq.heappush(heap, (-kid_err[k], counter, grand[k], grand_values[k], kid_fine[k]))
                counter += 1
            total += float(kid_fine.sum())
            total_err = max(total_err + float(kid_err.sum()), 0.0)
            active += 3

        return total / (4 * math.pi), total_err / (4 * math.pi)


def _norm_integrand(norm2: Callable[[np.ndarray], np.ndarray]):
    return lambda pts: np.sqrt(np.maximum(norm2(pts), 0.0))


def _log_integrand(norm2: Callable[[np.ndarray], np.ndarray]):
    # floored so a node on a zero of the field stays finite
    return lambda pts: 0.5 * np.log(np.maximum(norm2(pts), 1e-300))


# ----------------------------------------------------------------------
# maximum of |V| on the sphere

def fibonacci_sphere(count: int, radius: float = 1.0) -> np.ndarray:
    """Deterministic, nearly uniform points on the sphere"""
    k = np.arange(count) + 0.5
    z = 1 - 2 * k / count
    phi = math.pi * (3 - math.sqrt(5)) * k
    rho = np.sqrt(1 - z * z)
    return radius * np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


def _lagrange_polish(g: MPoly, point: np.ndarray, radius: float,
                     max_iter: int = 60) -> Tuple[np.ndarray, float]:
    """
    Newton on grad g = 2 lambda x, |x|^2 = r^2 using exact derivatives of g

    Returns:
        (stationary point, norm of the tangential gradient there)
    """
    n = g.nvars
    grad = [d.to_numeric() for d in g.gradient()]
    hess = [[g.diff(i).diff(j).to_numeric() for j in range(n)] for i in range(n)]
    x = np.array(point, dtype=float)
    r2 = radius * radius

    def tangential(xv):
        gv = np.array([f(xv) for f in grad])
        return gv - (gv @ xv / r2) * xv

    for _ in range(max_iter):
        gv = np.array([f(x) for f in grad])
        lam = gv @ x / (2 * r2)
        h = np.array([[f(x) for f in row] for row in hess])
        jac = np.zeros((n + 1, n + 1))
        jac[:n, :n] = h - 2 * lam * np.eye(n)
        jac[:n, n] = -2 * x
        jac[n, :n] = 2 * x
        rhs = np.concatenate([gv - 2 * lam * x, [x @ x - r2]])
        try:
            step = np.linalg.solve(jac, -rhs)
        except np.linalg.LinAlgError:
            break
        x = x + step[:n]
        x *= radius / np.linalg.norm(x)
        if np.linalg.norm(step[:n]) < NEWTON_TOLERANCE * max(radius, 1.0):
            break
    return x, float(np.linalg.norm(tangential(x)))


def sphere_maximum(g: MPoly, radius: float = 1.0, seeds: int = 2000,
                   starts: int = 24, ascent_steps: int = 30) -> Tuple[float, np.ndarray, float]:
    """
    Maximum of a polynomial over the sphere by multistart projected ascent
    polished with Newton

    Returns:
        (maximum, maximizer, tangential gradient norm at the maximizer)
    """
    values = g.to_numeric()
    grad = [d.to_numeric() for d in g.gradient()]
    pts = fibonacci_sphere(seeds, radius)
    sampled = values(pts)
    order = np.argsort(sampled)[::-1][:starts]
    x = pts[order]

    # projected gradient ascent on all starts at once
    step = 0.1 / max(float(np.max(np.abs(sampled))), 1e-300) * radius * radius
    for _ in range(ascent_steps):
        gv = np.stack([f(x) for f in grad], axis=-1)
        radial = np.sum(gv * x, axis=-1, keepdims=True) / (radius * radius)
        trial = x + step * (gv - radial * x)
        trial *= radius / np.linalg.norm(trial, axis=-1, keepdims=True)
        better = values(trial) >= values(x)
        x = np.where(better[:, None], trial, x)

    best_value, best_point, best_cert = -math.inf, x[0], math.inf
    for start in x:
        point, cert = _lagrange_polish(g, start, radius)
        value = float(values(point))
        if value > best_value:
            best_value, best_point, best_cert = value, point, cert
    grid_max = float(np.max(sampled))
    if best_value < grid_max:
        logger.warning(f"optimizer {best_value!r} below sampled maximum {grid_max!r}")
        best_value = grid_max
        best_point = pts[int(np.argmax(sampled))]
    return best_value, best_point, best_cert


# ----------------------------------------------------------------------
# spherical constants

def spherical_constants(vf: VectorField, radius: float = 1.0,
                        tolerance: float = QUADRATURE_TOLERANCE,
                        log_tolerance: float = LOG_QUADRATURE_TOLERANCE,
                        order: int = QUADRATURE_ORDER, seeds: int = 2000,
                        starts: int = 24, threads: int = 1) -> SphericalConstants:
    """
    alpha_0 (geometric mean), alpha_1, alpha_2 and alpha_inf of |V| over the
    sphere of the given radius, and the ratios Omega_v = alpha_v^2 / alpha_2

    Args:
        vf: polynomial field in three variables
        radius: sphere radius
        tolerance: target error of alpha_1 relative to sqrt(alpha_2)
        log_tolerance: target absolute error of the average of ln|V|
        order: Gauss points per tile side
        seeds: sample points seeding the maximum search
        starts: number of seeds polished for the maximum
        threads: worker threads for the three numerical parts

    Returns:
        SphericalConstants with alpha_2 exact
    """
    if vf.dim != 3 or vf.nvars != 3:
        raise ValueError("spherical constants are computed on the two-sphere")
    norm2 = squared_norm(vf)
    if norm2.is_zero:
        raise ZeroFieldError("the field is identically zero; alpha_0 is undefined")

    with OperationContext("spherical_constants", "SPHERICAL", logger):
        alpha2 = sphere_average(norm2, Fraction(radius).limit_denominator(10 ** 12))
        numeric = norm2.to_numeric()
        first_tolerance = tolerance * math.sqrt(float(alpha2))

        def first_moment():
            return _TileQuadrature(_norm_integrand(numeric), radius, order).average(first_tolerance)

        def log_moment():
            return _TileQuadrature(_log_integrand(numeric), radius, order).average(log_tolerance)

        def maximum():
            return sphere_maximum(norm2, radius, seeds, starts)

        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            futures = [pool.submit(first_moment), pool.submit(log_moment), pool.submit(maximum)]
            (alpha1, err1), (log_mean, err0), (max2, argmax, cert) = [f.result() for f in futures]

        alpha0 = math.exp(log_mean)
        alpha_inf = math.sqrt(max2)
        a2 = float(alpha2)
        constants = SphericalConstants(
            alpha0=alpha0,
            alpha1=alpha1,
            alpha2=alpha2,
            alpha_inf=alpha_inf,
            Omega0=alpha0 ** 2 / a2,
            Omega1=alpha1 ** 2 / a2,
            OmegaInf=max2 / a2,
            radius=radius,
            methods={"alpha0": "quadrature", "alpha1": "quadrature",
                     "alpha2": "exact", "alpha_inf": "optimization"},
            errors={"alpha0": alpha0 * err0, "alpha1": err1, "alpha_inf_gradient": cert},
            alpha_inf_point=[float(v) for v in argmax],
        )

    chain = 0 < constants.Omega0 < constants.Omega1 < 1 < constants.OmegaInf
    log_check(logger, "spherical_chain", chain,
              [constants.Omega0, constants.Omega1, constants.OmegaInf])
    if not chain:
        logger.warning("Omega chain 0 < Omega0 < Omega1 < 1 < OmegaInf does not hold; "
                       "check quadrature tolerances")
    return constants


def octa_sphere_field() -> VectorField:
    """Numerator of the octahedral superflow field, tangent to every sphere"""
    return VectorField.from_texts(OCTA_SPHERE_FIELD)


def rotate_field(vf: VectorField, rotation: Sequence[Sequence[Any]],
                 tolerance: float = ROTATION_TOLERANCE) -> VectorField:
    """
    Conjugate a field by an orthogonal matrix

    Exact entries must give an exactly orthogonal matrix. Float entries
    are checked to ``tolerance`` and the transpose is used as inverse.
    """
    if not any(isinstance(v, float) for row in rotation for v in row):
        exact = [[Fraction(v) for v in row] for row in rotation]
        n = len(exact)
        transpose = [[exact[j][i] for j in range(n)] for i in range(n)]
        product = mat_mul(transpose, exact)
        if any(product[i][j] != (1 if i == j else 0) for i in range(n) for j in range(n)):
            raise ValueError("rotation matrix is not orthogonal")
        return conjugate_field(vf, exact)

    m = np.asarray(rotation, dtype=float)
    n = vf.nvars
    if m.shape != (n, n):
        raise ValueError(f"rotation matrix must be {n}x{n}")
    defect = float(np.max(np.abs(m.T @ m - np.eye(n))))
    if defect > tolerance:
        raise ValueError(f"rotation matrix is not orthogonal (defect {defect:.3e})")
    entries = [[Fraction(float(v)) for v in row] for row in m]
    moved = [compose_linear(p, entries) for p in vf.numerators]
    den = compose_linear(vf.denominator, entries)
    nums = []
    for i in range(n):
        acc = MPoly.zero(n)
        for j in range(n):
            if entries[j][i]:
                acc = acc + moved[j] * entries[j][i]
        nums.append(acc)
    return VectorField(nums, den)


def octahedral_degree6_field(e: Any, f: Any) -> VectorField:
    """
    Degree-6 octahedral field tangent to spheres: cyclic shifts of
    (e (x^2 + y^2 + z^2) + f x^2) yz (y^2 - z^2)
    """
    e, f = Fraction(e), Fraction(f)
    x, y, z = (MPoly.variable(3, i) for i in range(3))
    r2 = x * x + y * y + z * z

    def component(a: MPoly, b: MPoly, c: MPoly) -> MPoly:
        return (r2 * e + a * a * f) * b * c * (b * b - c * c)

    return VectorField([component(x, y, z), component(y, z, x), component(z, x, y)])


# ----------------------------------------------------------------------
# zeros on the sphere

def sphere_zeros(vf: VectorField, radius: float = 1.0, seeds: int = 2000,
                 max_iter: int = 80, cluster_tolerance: float = CLUSTER_TOLERANCE) -> np.ndarray:
    """
    Distinct zeros of a sphere-tangent field on the sphere

    Every seed runs Gauss-Newton on V(x) = 0, |x|^2 = r^2 with exact
    polynomial Jacobians; converged iterates are clustered.
    """
    if vf.nvars != 3 or vf.dim != 3:
        raise ValueError("zero counting works on the two-sphere")
    nums = vf.numerators
    values = [p.to_numeric() for p in nums]
    jac = [[p.diff(j).to_numeric() for j in range(3)] for p in nums]
    scale = max((abs(float(c)) for p in nums for c in p.terms.values()), default=0.0)
    if scale == 0.0:
        raise ZeroFieldError("the zero field vanishes everywhere")
    degree = max(p.degree() for p in nums)
    residual_tol = 1e-11 * scale * max(radius, 1.0) ** degree

    x = fibonacci_sphere(seeds, radius)
    for _ in range(max_iter):
        g = np.concatenate([np.stack([f(x) for f in values], axis=-1),
                            (np.sum(x * x, axis=-1) - radius * radius)[:, None]], axis=-1)
        j = np.zeros((len(x), 4, 3))
        for row in range(3):
            for col in range(3):
                j[:, row, col] = jac[row][col](x)
        j[:, 3, :] = 2 * x
        step = -np.einsum("mij,mj->mi", np.linalg.pinv(j), g)
        x = x + step
        x *= radius / np.linalg.norm(x, axis=-1, keepdims=True)

    residual = np.linalg.norm(np.stack([f(x) for f in values], axis=-1), axis=-1)
    converged = x[residual < residual_tol]
    if len(converged) == 0:
        raise NonConvergenceError(
            f"no seed converged to a zero within {max_iter} iterations")

    reps: List[np.ndarray] = []
    for point in converged[np.lexsort(converged.T[::-1])]:
        if not reps or np.min(np.linalg.norm(np.array(reps) - point, axis=-1)) > cluster_tolerance:
            reps.append(point)
    logger.debug(f"{len(converged)} of {seeds} seeds converged to {len(reps)} zeros")
    return np.array(reps)


def sphere_vanish_count(vf: VectorField, radius: float = 1.0, seeds: int = 2000,
                        max_iter: int = 80) -> int:
    """Number of zeros of a sphere-tangent field on the sphere"""
    with OperationContext("sphere_vanish_count", "SPHERICAL", logger, log_start=False):
        count = len(sphere_zeros(vf, radius, seeds, max_iter))
    logger.info(f"field vanishes at {count} points of the sphere")
    return count


# ----------------------------------------------------------------------
# implicit equation of the image surface

def surface_polynomial(lines: Sequence[str] = SURFACE_FIXTURE) -> MPoly:
    """Sum over cyclic shifts of (X, Y, Z) of every fixture line"""
    shift = [MPoly.variable(3, 1), MPoly.variable(3, 2), MPoly.variable(3, 0)]
    total = MPoly.zero(3)
    for text in lines:
        p = parse_poly(text, SURFACE_NAMES)
        q = p.substitute(shift)
        total = total + p + q + q.substitute(shift)
    return total


def _squared_coordinates() -> Tuple[MPoly, MPoly, MPoly, MPoly, MPoly]:
    a, b, c = (MPoly.variable(3, i) for i in range(3))
    x2 = b * c * (b - c) ** 2
    y2 = a * c * (c - a) ** 2
    z2 = a * b * (a - b) ** 2
    xyz = a * b * c * (b - c) * (c - a) * (a - b)
    return x2, y2, z2, xyz, a + b + c


def _homogenized_in_squares(poly: MPoly) -> Optional[MPoly]:
    """
    Homogenize poly(X, Y, Z) composed with the octahedral map, written in
    a = x^2, b = y^2, c = z^2, with r^2 = a + b + c filling the degree gap.
    None when a monomial mixes parities.
    """
    x2, y2, z2, xyz, r2 = _squared_coordinates()
    top = poly.degree()
    cache: Dict[Tuple[int, int], MPoly] = {}

    def power(which: int, k: int) -> MPoly:
        key = (which, k)
        if key not in cache:
            cache[key] = (x2, y2, z2, r2)[which] ** k
        return cache[key]

    total = MPoly.zero(3)
    for (i, j, k), coeff in poly.terms.items():
        parities = {i % 2, j % 2, k % 2}
        if len(parities) != 1:
            return None
        odd = parities.pop()
        term = power(0, i // 2) * power(1, j // 2) * power(2, k // 2)
        if odd:
            term = term * xyz
        total = total + term * power(3, 2 * (top - i - j - k)) * coeff
    return total


def surface_identity_check(poly: Optional[MPoly] = None) -> bool:
    """
    Exact check that poly(yz(y^2-z^2), xz(z^2-x^2), xy(x^2-y^2)) vanishes on
    the unit sphere

    Args:
        poly: polynomial in (X, Y, Z); the transcribed surface equation when None
    """
    if poly is None:
        poly = surface_polynomial()
    if poly.is_zero:
        return True
    with OperationContext("surface_identity_check", "SPHERICAL", logger, log_start=False):
        homogenized = _homogenized_in_squares(poly)
        if homogenized is not None:
            holds = homogenized.is_zero
        else:
            x, y, z = (MPoly.variable(3, i) for i in range(3))
            image = [y * z * (y * y - z * z), x * z * (z * z - x * x), x * y * (x * x - y * y)]
            holds = reduce_mod_sphere(poly.substitute(image)).is_zero
    log_check(logger, "surface_identity", holds, holds, True)
    return holds


# ----------------------------------------------------------------------
# extremal quartic fields on the circle

def circle_beta2(coeffs: Sequence[Any]) -> Any:
    """
    Average of F^2 over the unit circle for F = a x^3 + b x^2 y + c x y^2 + d y^3

    Works for any coefficient ring closed under + and * with Fractions.
    """
    if len(coeffs) != 4:
        raise ValueError("a cubic form has four coefficients")
    total: Any = 0
    for k in range(7):
        avg = sphere_monomial_average((6 - k, k))
        if not avg:
            continue
        square: Any = 0
        for i in range(max(0, k - 3), min(3, k) + 1):
            square = square + coeffs[i] * coeffs[k - i]
        total = total + square * avg
    return total


def _form_on_circle(coeffs: Sequence[float], theta: Any) -> Any:
    a, b, c, d = coeffs
    cs, sn = np.cos(theta), np.sin(theta)
    return a * cs ** 3 + b * cs ** 2 * sn + c * cs * sn ** 2 + d * sn ** 3


def circle_beta_inf(coeffs: Sequence[float], samples: int = 720) -> Tuple[float, float]:
    """Maximum of |F| on the unit circle and the angle where it is attained"""
    grid = np.linspace(0, 2 * math.pi, samples, endpoint=False)
    values = np.abs(_form_on_circle(coeffs, grid))
    k = int(np.argmax(values))
    h = 2 * math.pi / samples
    res = optimize.minimize_scalar(lambda t: -abs(_form_on_circle(coeffs, t)),
                                   bounds=(grid[k] - h, grid[k] + h), method="bounded",
                                   options={"xatol": 1e-14})
    if -res.fun >= values[k]:
        return float(-res.fun), float(res.x)
    return float(values[k]), float(grid[k])


def circle_ratio(coeffs: Sequence[float]) -> float:
    """beta_inf^2 / beta_2 of the field yF • (-x)F"""
    beta2 = float(circle_beta2([float(c) for c in coeffs]))
    if beta2 <= 0:
        return math.inf
    return circle_beta_inf(coeffs)[0] ** 2 / beta2


def normalize_cubic(coeffs: Sequence[float]) -> Tuple[float, float, float, float]:
    """
    Rotate so |F| peaks at (1, 0) (forcing b = 0), then fix signs a >= 0,
    d >= 0 and scale d = 1 unless d vanishes
    """
    _, theta = circle_beta_inf(coeffs)
    phis = np.linspace(0, math.pi, 8, endpoint=False)
    cs, sn = np.cos(phis), np.sin(phis)
    basis = np.stack([cs ** 3, cs ** 2 * sn, cs * sn ** 2, sn ** 3], axis=-1)
    rotated = np.linalg.lstsq(basis, _form_on_circle(coeffs, phis + theta), rcond=None)[0]
    a, _, c, d = (float(v) for v in rotated)
    if a < 0:
        a, c, d = -a, -c, -d
    if d < 0:
        d = -d
    if d > 1e-9 * max(abs(a), abs(c), 1e-300):
        return a / d, 0.0, c / d, 1.0
    return 1.0, 0.0, c / a, 0.0


def _equal_peak_constraint() -> Tuple[List[sympy.Expr], Tuple[sympy.Symbol, sympy.Symbol]]:
    """
    Factors of the condition that F = a x^3 + c x y^2 + y^3 has a second
    critical point on the circle where |F| equals F(1, 0) = a
    """
    a, c, t = sympy.symbols("a c t")
    x, y = sympy.symbols("x y")
    form = a * x ** 3 + c * x * y ** 2 + y ** 3
    critical = sympy.expand(y * sympy.diff(form, x) - x * sympy.diff(form, y))
    critical = sympy.cancel(critical.subs({x: 1, y: t}) / t)
    height = sympy.expand(form.subs({x: 1, y: t}) ** 2 - a ** 2 * (1 + t ** 2) ** 3)
    resultant = sympy.resultant(critical, height, t)
    _, factors = sympy.factor_list(resultant)
    return [f for f, _ in factors if f.free_symbols == {a, c}], (a, c)


def _newton(system: Sequence[MPoly], start: Sequence[float],
            max_iter: int = 50) -> Tuple[np.ndarray, float]:
    n = len(start)
    funcs = [p.to_numeric() for p in system]
    jac = [[p.diff(j).to_numeric() for j in range(n)] for p in system]
    x = np.array(start, dtype=float)
    for _ in range(max_iter):
        g = np.array([f(x) for f in funcs])
        j = np.array([[f(x) for f in row] for row in jac])
        try:
            step = np.linalg.solve(j, -g)
        except np.linalg.LinAlgError:
            break
        x = x + step
        if np.linalg.norm(step) < NEWTON_TOLERANCE * max(1.0, np.linalg.norm(x)):
            break
    return x, float(np.linalg.norm([f(x) for f in funcs]))


def _multistart(objective: Callable[[np.ndarray], float], starts: np.ndarray,
                threads: int) -> List[Any]:
    def run(x0):
        return optimize.minimize(objective, x0, method="Nelder-Mead",
                                 options={"xatol": 1e-11, "fatol": 1e-13, "maxiter": 6000})

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        return list(pool.map(run, starts))


def extremal_ratio_2_4(mode: str = "min", starts: int = 16, seed: int = 20240607,
                       threads: int = 1) -> ExtremalResult:
    """
    Extremes of beta_inf^2 / beta_2 over the fields yF • (-x)F on the circle,
    F a real cubic form

    The search runs over the chart d = 1 and the boundary chart d = 0 and
    is polished by Newton on exact polynomial systems.
    """
    if mode not in ("min", "max"):
        raise ValueError("mode must be 'min' or 'max'")
    sign = 1.0 if mode == "min" else -1.0
    rng = np.random.default_rng(seed)
    x0 = rng.normal(scale=1.5, size=(starts, 3))

    charts = {
        "d=1": lambda p: sign * circle_ratio((p[0], p[1], p[2], 1.0)),
        "d=0": lambda p: sign * circle_ratio((p[0], p[1], p[2], 0.0)),
    }
    best: Optional[Tuple[float, Tuple[float, float, float, float], str]] = None
    with OperationContext(f"extremal_ratio_2_4_{mode}", "SPHERICAL", logger, log_start=False):
        for chart, objective in charts.items():
            tail = 1.0 if chart == "d=1" else 0.0
            for res in _multistart(objective, x0, threads):
                if not np.isfinite(res.fun):
                    continue
                if best is None or res.fun < best[0]:
                    best = (float(res.fun), (*map(float, res.x), tail), chart)
        if best is None:
            raise NonConvergenceError("no start produced a finite ratio")

        a, _, c, d = normalize_cubic(best[1])
        chart = "d=1" if d else "d=0"
        av, cv, dv = (MPoly.variable(3, i) for i in range(3))
        beta2 = circle_beta2([av, MPoly.zero(3), cv, dv])
        constraint_text = None

        if mode == "min" and d:
            factors, symbols = _equal_peak_constraint()
            point = {symbols[0]: a, symbols[1]: c}
            factor = min(factors, key=lambda f: abs(float(f.subs(point))))
            constraint = MPoly.from_sympy(factor, symbols)
            constraint_text = constraint.to_text(("a", "c"))
            b2 = beta2.substitute([MPoly.variable(2, 0), MPoly.variable(2, 1),
                                   MPoly.constant(2, 1)])
            num = MPoly.variable(2, 0) ** 2
            grad_r = [num.diff(i) * b2 - num * b2.diff(i) for i in range(2)]
            lagrange = grad_r[0] * constraint.diff(1) - grad_r[1] * constraint.diff(0)
            solution, certificate = _newton([lagrange, constraint], (a, c))
            a, c = float(solution[0]), float(solution[1])
        else:
            # ratio is a^2 / beta_2 once |F| peaks at (1, 0); scale a = 1
            fixed = beta2.substitute([MPoly.constant(2, 1), MPoly.variable(2, 0),
                                      MPoly.variable(2, 1)])
            start = (c / a, d / a) if a else (c, d)
            solution, certificate = _newton(fixed.gradient(), start)
            b2v = fixed.evaluate_float(solution)
            certificate = certificate / b2v ** 2
            a, c, d = 1.0, float(solution[0]), float(solution[1])
            if d > 1e-9:
                a, c, d = a / d, c / d, 1.0
            chart = "d=1" if d == 1.0 else "d=0"

        optimizer = (a, 0.0, c, d)
        value = circle_ratio(optimizer)
        if sign * value > best[0] + 1e-9:
            logger.warning(f"polished ratio {value!r} is worse than the search value {sign * best[0]!r}")

    result = ExtremalResult(mode=mode, value=value, optimizer=optimizer,
                            certificate=certificate, chart=chart,
                            constraint=constraint_text)
    log_check(logger, f"extremal_ratio_2_4_{mode}", result.stationary, value,
              tolerance=CERTIFICATE_TOLERANCE)
    logger.info(f"extremal {mode} ratio {value:.12f} at a={a:.12f} c={c:.12f} d={d:g} ({chart})")
    return result
