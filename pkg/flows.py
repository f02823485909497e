#!/usr/bin/env python3
"""
Flows of Homogeneous Vector Fields

Exact Taylor recurrences for projective and general flows, univariate ray
series, PDE residual checks, a Dormand-Prince 5(4) orbit integrator with
first-integral monitoring, planar projections of sphere-tangent fields and
probes for trigonometric Beltrami-type fields.
"""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import sympy

from exactalg import (
    DimensionMismatchError,
    MPoly,
    RatFunc,
    VectorField,
    radial_pairing,
    series_div,
    series_mul,
)
from superflow_logging import get_component_logger

logger = get_component_logger("FLOWS")

RESIDUAL_FREE = math.inf
TANGENCY_TOLERANCE = 1e-9
POLE_EXCLUSION = 1e-9


class NotQuadraticFieldError(ValueError):
    """Raised when a projective recurrence receives a field that is not 2-homogeneous"""


class DenominatorVanishingError(ArithmeticError):
    """Raised when the field denominator vanishes along an integrated orbit"""

    def __init__(self, message: str, location: Sequence[float], time: float):
        super().__init__(f"{message} at t={time:.6g}, x={list(location)}")
        self.location = list(location)
        self.time = time


class StepSizeUnderflowError(ArithmeticError):
    """Raised when the adaptive step falls below the representable minimum"""


class TangencyViolationError(ValueError):
    """Raised when a projection precondition on tangency fails"""


@dataclass
class FlowSeries:
    """
    Per-order terms of a flow expansion

    terms[j][i] is the i-th term of coordinate j: the i-homogeneous
    projective component (MPoly or RatFunc), or f_j^(i)/i! for general flows.
    """

    kind: str
    terms: List[List[Any]]
    order: int

    @property
    def dim(self) -> int:
        return len(self.terms)

    def component(self, j: int) -> List[Any]:
        return self.terms[j]

    def truncated_sum(self, j: int) -> Any:
        total = self.terms[j][0]
        for term in self.terms[j][1:]:
            total = total + term
        return total

    def to_json(self) -> str:
        return json.dumps({
            "schema": 1,
            "kind": self.kind,
            "order": self.order,
            "terms": [[t.to_text() for t in comp] for comp in self.terms],
        }, indent=2)


@dataclass
class OrbitTrace:
    times: np.ndarray
    states: np.ndarray
    monitor_names: List[str] = field(default_factory=list)
    monitor_drift: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    accepted: int = 0
    rejected: int = 0

    @property
    def integral_drift(self) -> Dict[str, float]:
        if self.monitor_drift.size == 0:
            return {name: 0.0 for name in self.monitor_names}
        return {name: float(np.max(self.monitor_drift[:, k]))
                for k, name in enumerate(self.monitor_names)}

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


@dataclass
class PlanarField:
    mode: str
    samples: pd.DataFrame
    closed_form: Optional[Tuple[sympy.Expr, sympy.Expr]] = None
    closed_form_error: Optional[float] = None


# ----------------------------------------------------------------------
# Taylor recurrences

def _require_quadratic(vf: VectorField):
    if vf.degree() != 2:
        raise NotQuadraticFieldError(
            f"projective recurrences need a 2-homogeneous field, got degree {vf.degree()}")


def taylor_projective(vf: VectorField, order: int) -> FlowSeries:
    """
    Projective flow components up to the given order

    Polynomial fields produce MPoly terms through
    u_(i+1) = (1/i) * sum_k d_k u_i * V_k. Fields with a non-constant
    denominator D produce RatFunc terms P_i / D^(m_i), m_1 = 0, m_(i+1) = m_i + 2.
    """
    _require_quadratic(vf)
    if order < 1:
        raise ValueError("series order must be at least 1")
    n = vf.nvars
    if vf.is_polynomial():
        comps = vf.polynomial_components()
        terms = []
        for j in range(n):
            series = [MPoly.zero(n), MPoly.variable(n, j)]
            for i in range(1, order):
                prev = series[i]
                nxt = MPoly.zero(n)
                for k in range(n):
                    dk = prev.diff(k)
                    if not dk.is_zero:
                        nxt = nxt + dk * comps[k]
                series.append(nxt / i)
            terms.append(series)
        return FlowSeries("projective", terms, order)

    den = vf.denominator
    den_grad = den.gradient()
    nums = vf.numerators
    terms = []
    for j in range(n):
        p = MPoly.variable(n, j)
        m = 0
        series: List[Any] = [RatFunc(MPoly.zero(n)), RatFunc(p)]
        for i in range(1, order):
            nxt = MPoly.zero(n)
            for k in range(n):
                inner = p.diff(k) * den
                if m:
                    inner = inner - p * den_grad[k] * m
                if not inner.is_zero:
                    nxt = nxt + inner * nums[k]
            p = nxt / i
            m += 2
            series.append(RatFunc(p, den ** m))
        terms.append(series)
    return FlowSeries("projective", terms, order)


def taylor_general(vf: VectorField, order: int) -> FlowSeries:
    """Terms f_j^(l)/l! of F_j(x, t) = sum_l f_j^(l)(x) t^l / l! for polynomial fields"""
    comps = vf.polynomial_components()
    n = vf.nvars
    terms = []
    for j in range(n):
        current = MPoly.variable(n, j)
        series = [current]
        factorial = 1
        for l in range(1, order + 1):
            nxt = MPoly.zero(n)
            for i in range(n):
                di = current.diff(i)
                if not di.is_zero:
                    nxt = nxt + comps[i] * di
            current = nxt
            factorial *= l
            series.append(current / factorial)
        terms.append(series)
    return FlowSeries("general", terms, order)


def evaluate_series_on_ray(series: FlowSeries, direction: Sequence[Any], component: int) -> List[Any]:
    """Coefficients c_i of t^i after substituting x = direction * t"""
    return [term.evaluate(list(direction)) for term in series.terms[component]]


def _poly_on_series(p: MPoly, inputs: Sequence[List[Any]], n_terms: int,
                    coerce: Callable[[Fraction], Any]) -> List[Any]:
    powers: List[Dict[int, List[Any]]] = [{0: [coerce(Fraction(1))] + [0] * (n_terms - 1)}
                                          for _ in inputs]
    total: List[Any] = [0] * n_terms
    for exps, c in p.terms.items():
        product: List[Any] = [coerce(c)] + [0] * (n_terms - 1)
        for i, k in enumerate(exps):
            if not k:
                continue
            cache = powers[i]
            if k not in cache:
                top = max(cache)
                acc = cache[top]
                for step in range(top + 1, k + 1):
                    acc = series_mul(acc, inputs[i], n_terms)
                    cache[step] = acc
            product = series_mul(product, cache[k], n_terms)
        total = [a + b for a, b in zip(total, product)]
    return total


def ray_series(vf: VectorField, direction: Sequence[Any], order: int,
               exact_surds: bool = False) -> List[List[Any]]:
    """
    Coefficients of t^k, k = 0..order, of the projective flow phi(direction * t)

    Uses phi(r t) = t F(r, t) where F solves F' = V(F), F(r, 0) = r, via
    (k+1) a_(k+1) = [t^k] V(a(t)). With exact_surds the arithmetic runs on
    sympy numbers (for directions containing square roots), else on Fractions.
    """
    _require_quadratic(vf)
    n = vf.nvars
    if exact_surds:
        def coerce(c):
            return sympy.Rational(c.numerator, c.denominator)

        def normalize(v):
            return sympy.expand(v)

        start = [sympy.sympify(v) for v in direction]
    else:
        def coerce(c):
            return c

        def normalize(v):
            return v

        start = [Fraction(v) for v in direction]

    coeffs = [[v] for v in start]
    for k in range(order - 1):
        n_terms = k + 1
        den = _poly_on_series(vf.denominator, coeffs, n_terms, coerce)
        for j in range(n):
            num = _poly_on_series(vf.numerators[j], coeffs, n_terms, coerce)
            value = num[k] if vf.is_polynomial() and den[0] == 1 else series_div(num, den, n_terms)[k]
            coeffs[j].append(normalize(value / (k + 1)))
    zero = coerce(Fraction(0))
    return [[zero] + c for c in coeffs]


# ----------------------------------------------------------------------
# rational flow fixture

def psi_field(big_n: int, big_m: int) -> VectorField:
    """((N-1) x z, (M-1) y z, -z^2), the field of x(z+1)^(N-1), y(z+1)^(M-1), z/(z+1)"""
    return VectorField([
        MPoly(3, {(1, 0, 1): big_n - 1}),
        MPoly(3, {(0, 1, 1): big_m - 1}),
        MPoly(3, {(0, 0, 2): -1}),
    ])


def _binomial(a: int, k: int) -> Fraction:
    value = Fraction(1)
    for i in range(k):
        value = value * (a - i) / (i + 1)
    return value


def psi_flow_series(big_n: int, big_m: int, order: int) -> FlowSeries:
    """Binomial expansions of the closed-form rational flow"""
    x, y, z = (MPoly.variable(3, i) for i in range(3))
    u = [MPoly.zero(3)] + [x * z ** (i - 1) * _binomial(big_n - 1, i - 1) for i in range(1, order + 1)]
    v = [MPoly.zero(3)] + [y * z ** (i - 1) * _binomial(big_m - 1, i - 1) for i in range(1, order + 1)]
    w = [MPoly.zero(3)] + [z ** i * (-1) ** (i - 1) for i in range(1, order + 1)]
    return FlowSeries("projective", [u, v, w], order)


# ----------------------------------------------------------------------
# PDE residuals

def _as_ratfunc(term: Any) -> RatFunc:
    return term if isinstance(term, RatFunc) else RatFunc(term)


def pde_residual(series: FlowSeries, vf: VectorField) -> float:
    """
    Lowest degree k with a nonzero residual of grad u_(k-1) . V - x . grad u_k + u_k

    Checks k = 1..order+1 for every component and returns RESIDUAL_FREE when
    all of them vanish.
    """
    n = vf.nvars
    if series.dim != n:
        raise DimensionMismatchError("series and field dimensions differ")
    comps = vf.components()
    xs = [MPoly.variable(n, i) for i in range(n)]
    lowest = RESIDUAL_FREE
    for j in range(n):
        terms = [_as_ratfunc(t) for t in series.terms[j]]
        terms += [RatFunc(MPoly.zero(n))] * 2
        for k in range(1, series.order + 2):
            residual = terms[k]
            for i in range(n):
                if not terms[k - 1].is_zero:
                    residual = residual + terms[k - 1].diff(i) * comps[i]
                if not terms[k].is_zero:
                    residual = residual - terms[k].diff(i) * xs[i]
            if not residual.is_zero:
                lowest = min(lowest, k)
                break
    return lowest


def _det_truncated(matrix: List[List[MPoly]], max_degree: int) -> MPoly:
    size = len(matrix)
    if size == 1:
        return matrix[0][0].truncate(max_degree)
    nvars = matrix[0][0].nvars
    total = MPoly.zero(nvars)
    for col in range(size):
        entry = matrix[0][col]
        if entry.is_zero:
            continue
        minor = [row[:col] + row[col + 1:] for row in matrix[1:]]
        term = entry.mul_truncated(_det_truncated(minor, max_degree), max_degree)
        total = total + term if col % 2 == 0 else total - term
    return total


def nonlinear_pde_residual(su: FlowSeries, sv: FlowSeries, sw: FlowSeries,
                           order: int) -> bool:
    """
    Determinant form of the second-order PDE system on truncated series

    su, sv, sw may be the same FlowSeries; components 0, 1, 2 are taken
    from them respectively. True iff every term of degree <= order vanishes.
    """
    sums = (su.truncated_sum(0), sv.truncated_sum(1), sw.truncated_sum(2))
    if not all(isinstance(p, MPoly) for p in sums):
        raise TypeError("nonlinear residual works on polynomial series")
    u, v, w = (p.truncate(order) for p in sums)
    n = 3
    xs = [MPoly.variable(n, i) for i in range(n)]

    def euler(p: MPoly) -> MPoly:
        total = MPoly.zero(n)
        for i in range(n):
            total = total + xs[i] * p.diff(i)
        return total

    grads = [p.gradient() for p in (u, v, w)]
    first_row = [(euler(u) - u) * 2] + [euler(grads[0][i]) for i in range(n)]
    matrix = [first_row,
              [u] + grads[0],
              [v] + grads[1],
              [w] + grads[2]]
    det = _det_truncated(matrix, order)
    return det.is_zero


# ----------------------------------------------------------------------
# orbit integration

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
PI_ALPHA = 0.7 / 5
PI_BETA = 0.4 / 5


def _field_function(vf: VectorField, sign: float):
    nums = [p.to_numeric() for p in vf.numerators]
    den = vf.denominator.to_numeric()
    den_degree = max(vf.denominator.degree(), 0)

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        d = float(den(x))
        scale = max(float(np.max(np.abs(x))), 1.0) ** den_degree
        if abs(d) < 1e-12 * scale:
            raise DenominatorVanishingError("field denominator vanishes", x, t)
        return sign * np.array([float(f(x)) for f in nums]) / d

    return rhs


def integrate_orbit(vf: VectorField, x0: Sequence[float], t_end: float, rtol: float = 1e-10,
                    monitors: Optional[Sequence[MPoly]] = None, reverse: bool = False,
                    max_steps: int = 1_000_000) -> OrbitTrace:
    """
    Integrate x' = V(x) (or -V with reverse) with Dormand-Prince 5(4) and PI step control

    Args:
        vf: vector field
        x0: starting point
        t_end: non-negative duration
        rtol: relative tolerance in [1e-13, 1e-3]
        monitors: polynomials whose relative drift is recorded at each accepted step
        reverse: integrate the negated field (the p' = -V(p) convention)

    Raises:
        DenominatorVanishingError, StepSizeUnderflowError
    """
    if not 1e-13 <= rtol <= 1e-3:
        raise ValueError(f"rtol {rtol} outside [1e-13, 1e-3]")
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    monitors = list(monitors or [])
    names = [m.to_text() for m in monitors]
    x = np.array(x0, dtype=float)
    if x.shape != (vf.nvars,):
        raise DimensionMismatchError("starting point does not match field dimension")
    monitor_fns = [m.to_numeric() for m in monitors]
    start_values = [float(f(x)) for f in monitor_fns]

    def drift_of(state: np.ndarray) -> List[float]:
        return [abs(float(f(state)) - w0) / max(1.0, abs(w0))
                for f, w0 in zip(monitor_fns, start_values)]

    times = [0.0]
    states = [x.copy()]
    drifts = [drift_of(x)] if monitors else []

    if t_end == 0 or not np.any(x):
        return OrbitTrace(np.array(times), np.array(states), names,
                          np.array(drifts) if monitors else np.zeros((0, 0)))

    rhs = _field_function(vf, -1.0 if reverse else 1.0)
    local_tol = max(0.01 * rtol, 1e-14)
    t = 0.0
    k1 = rhs(t, x)
    scale0 = local_tol * (1.0 + np.abs(x))
    d0 = np.sqrt(np.mean((x / scale0) ** 2))
    d1 = np.sqrt(np.mean((k1 / scale0) ** 2))
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h, t_end)
    err_prev = 1e-4
    accepted = rejected = 0

    for _ in range(max_steps):
        if t >= t_end:
            break
        last = h >= t_end - t
        if last:
            h = t_end - t
        if h < 1e-14 * max(1.0, abs(t)):
            raise StepSizeUnderflowError(f"step size underflow at t={t:.6g}, x={x.tolist()}")
        ks = [k1]
        for stage in range(1, 7):
            y = x + h * sum(a * k for a, k in zip(_A[stage], ks))
            ks.append(rhs(t + _C[stage] * h, y))
        x_new = x + h * sum(b * k for b, k in zip(_B5, ks))
        err_vec = h * sum(e * k for e, k in zip(_E, ks))
        scale = local_tol * (1.0 + np.maximum(np.abs(x), np.abs(x_new)))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))

        if err <= 1.0:
            accepted += 1
            t = t_end if last else t + h
            x = x_new
            k1 = ks[6]
            times.append(t)
            states.append(x.copy())
            if monitors:
                drifts.append(drift_of(x))
            err = max(err, 1e-10)
            factor = SAFETY * err ** (-PI_ALPHA) * err_prev ** PI_BETA
            err_prev = err
            h *= min(MAX_FACTOR, max(MIN_FACTOR, factor))
        else:
            rejected += 1
            h *= max(MIN_FACTOR, SAFETY * err ** (-1 / 5))
    if t < t_end:
        raise StepSizeUnderflowError(f"max_steps {max_steps} exhausted at t={t:.6g}")

    logger.debug(f"orbit to t={t_end}: {accepted} accepted, {rejected} rejected steps")
    return OrbitTrace(np.array(times), np.array(states), names,
                      np.array(drifts) if monitors else np.zeros((0, 0)),
                      accepted, rejected)


def flow_at(vf: VectorField, x: Sequence[float], t: float = 1.0, rtol: float = 1e-12) -> np.ndarray:
    """Numerical flow F(x, t)"""
    return integrate_orbit(vf, x, t, rtol).final_state


def semigroup_check(vf: VectorField, x0: Sequence[float], s: float, t: float,
                    rtol: float = 1e-10) -> float:
    """max-norm of F(F(x0, s), t) - F(x0, s + t)"""
    mid = integrate_orbit(vf, x0, s, rtol).final_state
    two_leg = integrate_orbit(vf, mid, t, rtol).final_state
    one_leg = integrate_orbit(vf, x0, s + t, rtol).final_state
    return float(np.max(np.abs(two_leg - one_leg)))


def trace_to_frame(trace: OrbitTrace, names: Optional[Sequence[str]] = None) -> pd.DataFrame:
    n = trace.states.shape[1]
    names = list(names) if names is not None else [f"x{i + 1}" for i in range(n)]
    frame = pd.DataFrame(trace.states, columns=names)
    frame.insert(0, "t", trace.times)
    for k, name in enumerate(trace.monitor_names):
        frame[f"drift[{name}]"] = trace.monitor_drift[:, k]
    return frame


def write_trace_csv(trace: OrbitTrace, path: str, names: Optional[Sequence[str]] = None) -> str:
    trace_to_frame(trace, names).to_csv(path, index=False)
    return path


# ----------------------------------------------------------------------
# planar projections

def stereographic_inverse(alpha: float, beta: float) -> np.ndarray:
    rho = alpha * alpha + beta * beta
    return np.array([4 * alpha, 4 * beta, rho - 4]) / (rho + 4)


def orthogonal_inverse(alpha: float, beta: float) -> np.ndarray:
    return np.array([alpha + 1 / (4 * alpha), alpha - 1 / (4 * alpha), beta])


def projected_circle(normal: Sequence[float]) -> Tuple[Tuple[float, float], float]:
    """Centre and radius of the stereographic image of the great circle normal . x = 0"""
    n1, n2, n3 = (float(v) for v in normal)
    if n3 == 0:
        raise ValueError("planes through the pole project to lines")
    centre = (-2 * n1 / n3, -2 * n2 / n3)
    radius = math.sqrt(4 * (n1 * n1 + n2 * n2) / (n3 * n3) + 4)
    return centre, radius


def _grid(spec: Tuple[float, float, float, float, int]) -> List[Tuple[float, float]]:
    a0, a1, b0, b1, resolution = spec
    alphas = np.linspace(a0, a1, resolution)
    betas = np.linspace(b0, b1, resolution)
    return [(float(a), float(b)) for a in alphas for b in betas]


def planar_projection(vf: VectorField, mode: str,
                      grid: Tuple[float, float, float, float, int]) -> PlanarField:
    """
    Sample the projected plane field of a sphere- or quadric-tangent field

    Args:
        vf: three-dimensional field
        mode: stereographic or orthogonal
        grid: (alpha_min, alpha_max, beta_min, beta_max, resolution)

    Raises:
        TangencyViolationError: the field is not tangent to the target surface
    """
    evaluate = vf.to_numeric()
    rows = []
    worst_tangency = 0.0
    if mode == "stereographic":
        for alpha, beta in _grid(grid):
            point = stereographic_inverse(alpha, beta)
            if 1 - point[2] < POLE_EXCLUSION:
                continue
            v = evaluate(point)
            worst_tangency = max(worst_tangency, abs(float(np.dot(point, v))))
            pi = 2 * v[0] + alpha * v[2]
            theta = 2 * v[1] + beta * v[2]
            factor = (alpha * alpha + beta * beta + 4) / 8
            rows.append((alpha, beta, pi, theta, factor * pi, factor * theta))
        columns = ["alpha", "beta", "Pi", "Theta", "true_Pi", "true_Theta"]
        if worst_tangency > TANGENCY_TOLERANCE:
            raise TangencyViolationError(
                f"field is not tangent to spheres: max |x.V| = {worst_tangency:.3e}")
        return PlanarField(mode, pd.DataFrame(rows, columns=columns))

    if mode == "orthogonal":
        a, b = sympy.symbols("alpha beta", real=True)
        xyz = sympy.symbols("x y z")
        comps = [c.num.to_sympy(xyz) / c.den.to_sympy(xyz) for c in vf.components()]
        image = [a + 1 / (4 * a), a - 1 / (4 * a), b]
        sub = dict(zip(xyz, image))
        tangency = sympy.simplify((xyz[0] * comps[0] - xyz[1] * comps[1]).subs(sub))
        if tangency != 0:
            raise TangencyViolationError("field is not tangent to x^2 - y^2 = 1")
        pi_hat = sympy.simplify(((comps[0] + comps[1]) / 2).subs(sub))
        theta_hat = sympy.simplify(comps[2].subs(sub))
        pi_fn = sympy.lambdify((a, b), pi_hat, "numpy")
        theta_fn = sympy.lambdify((a, b), theta_hat, "numpy")
        closed = (a * b, a ** 2 - 1 / (16 * a ** 2))
        worst = 0.0
        for alpha, beta in _grid(grid):
            if alpha == 0:
                continue
            point = orthogonal_inverse(alpha, beta)
            v = evaluate(point)
            pi = (v[0] + v[1]) / 2
            theta = v[2]
            rows.append((alpha, beta, pi, theta))
            worst = max(worst, abs(pi - float(pi_fn(alpha, beta))),
                        abs(theta - float(theta_fn(alpha, beta))))
        matches = sympy.simplify(pi_hat - closed[0]) == 0 and sympy.simplify(theta_hat - closed[1]) == 0
        frame = pd.DataFrame(rows, columns=["alpha", "beta", "Pi", "Theta"])
        return PlanarField(mode, frame, (pi_hat, theta_hat) if not matches else closed, worst)

    raise ValueError(f"unknown projection mode: {mode}")


def write_planar_csv(planar: PlanarField, path: str) -> str:
    planar.samples.to_csv(path, index=False)
    return path


# ----------------------------------------------------------------------
# trigonometric Beltrami-type fields

def trig_field(name: str) -> Tuple[Tuple[sympy.Symbol, ...], List[sympy.Expr]]:
    """Symbolic components of the tetrahedral, octahedral or dihedral trig field"""
    if name in ("T_tetra", "O_octa"):
        x, y, z = sympy.symbols("x y z", real=True)
        sin, cos = sympy.sin, sympy.cos
        if name == "T_tetra":
            comps = [
                z * sin(y) + y * sin(z) + x * cos(y) - x * cos(z),
                x * sin(z) + z * sin(x) + y * cos(z) - y * cos(x),
                y * sin(x) + x * sin(y) + z * cos(x) - z * cos(y),
            ]
        else:
            comps = [
                y * sin(z) - z * sin(y) + x * cos(y) - 2 * sin(x) + x * cos(z),
                z * sin(x) - x * sin(z) + y * cos(z) - 2 * sin(y) + y * cos(x),
                x * sin(y) - y * sin(x) + z * cos(x) - 2 * sin(z) + z * cos(y),
            ]
        return (x, y, z), comps
    if name == "D_dihedral":
        x, y = sympy.symbols("x y", real=True)
        r3 = sympy.sqrt(3)
        half = sympy.Rational(1, 2)
        comps = [
            -sympy.cos(y) + r3 * sympy.sin(x * half) * sympy.sin(r3 * y * half)
            + sympy.cos(r3 * x * half) * sympy.cos(y * half),
            -sympy.cos(x) + r3 * sympy.sin(y * half) * sympy.sin(r3 * x * half)
            + sympy.cos(r3 * y * half) * sympy.cos(x * half),
        ]
        return (x, y), comps
    raise ValueError(f"unknown trig field: {name}")


TRIG_FIELDS = ("T_tetra", "O_octa", "D_dihedral")


def trig_field_taylor(name: str, degree: int) -> List[MPoly]:
    """Homogeneous degree-d part of the trig field's Taylor expansion at 0"""
    symbols, comps = trig_field(name)
    eps = sympy.Symbol("eps")
    scaled = {s: eps * s for s in symbols}
    out = []
    for c in comps:
        expansion = sympy.series(c.subs(scaled, simultaneous=True), eps, 0, degree + 1).removeO()
        part = sympy.expand(expansion.coeff(eps, degree))
        out.append(MPoly.from_sympy(part, symbols))
    return out


def beltrami_probe(name: str, points: int = 1000, seed: int = 20240607) -> Dict[str, Optional[float]]:
    """
    Max |curl F - F|, |div F| and |lap F + F| over random points of [-pi, pi]^n

    Derivatives are symbolic. curl is reported only in three dimensions.
    """
    symbols, comps = trig_field(name)
    n = len(symbols)
    div = sum(sympy.diff(c, s) for c, s in zip(comps, symbols))
    helmholtz = [sum(sympy.diff(c, s, 2) for s in symbols) + c for c in comps]
    exprs = [div] + helmholtz
    curl_residual = []
    if n == 3:
        x, y, z = symbols
        a, b, c = comps
        curl = [sympy.diff(c, y) - sympy.diff(b, z),
                sympy.diff(a, z) - sympy.diff(c, x),
                sympy.diff(b, x) - sympy.diff(a, y)]
        curl_residual = [cu - comp for cu, comp in zip(curl, comps)]
        exprs += curl_residual
    fn = sympy.lambdify(symbols, exprs, "numpy")
    rng = np.random.default_rng(seed)
    samples = rng.uniform(-math.pi, math.pi, size=(points, n))
    values = np.array([np.array(fn(*row), dtype=float) for row in samples])
    report: Dict[str, Optional[float]] = {
        "field": name,
        "max_div": float(np.max(np.abs(values[:, 0]))),
        "max_helmholtz": float(np.max(np.abs(values[:, 1:1 + n]))),
        "max_curl_minus_field": float(np.max(np.abs(values[:, 1 + n:]))) if n == 3 else None,
    }
    logger.debug(f"beltrami probe {report}")
    return report


def radial_tangency(vf: VectorField) -> bool:
    return radial_pairing(vf).is_zero
